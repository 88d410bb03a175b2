//! Input schedules: which input vector is applied at which sample.

use super::EngineError;

/// Applies a sequence of input vectors, each held for `window` samples, while
/// the clock runs with `clock_period` samples per period.
///
/// Vector bit `n - 1 - j` drives label `j`, so label 0 is the most
/// significant (slowest-toggling) input in binary counting order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSchedule {
    labels: Vec<String>,
    vectors: Vec<u32>,
    window: usize,
    clock_period: usize,
}

pub const MAX_SCHEDULE_INPUTS: usize = 16;

impl InputSchedule {
    /// Binary-counting schedule over all `2^n` input vectors in `num_samples`
    /// samples, one clock period per vector.
    pub fn exhaustive(labels: &[String], num_samples: usize) -> Result<Self, EngineError> {
        let n = labels.len();
        if n == 0 || n > MAX_SCHEDULE_INPUTS {
            return Err(EngineError::Schedule(format!(
                "{n} inputs; supported range is 1..={MAX_SCHEDULE_INPUTS}"
            )));
        }
        let combos = 1usize << n;
        if num_samples == 0 || !num_samples.is_multiple_of(combos * 4) {
            return Err(EngineError::Schedule(format!(
                "{num_samples} samples not divisible by 2^{n}*4 = {}",
                combos * 4
            )));
        }
        let window = num_samples / combos;
        Ok(Self {
            labels: labels.to_vec(),
            vectors: (0..combos as u32).collect(),
            window,
            clock_period: window,
        })
    }

    /// Schedule visiting `vectors` in the given order.
    pub fn from_vectors(
        labels: &[String],
        vectors: Vec<u32>,
        window: usize,
        clock_period: usize,
    ) -> Result<Self, EngineError> {
        let n = labels.len();
        if n > MAX_SCHEDULE_INPUTS {
            return Err(EngineError::Schedule(format!("{n} inputs exceed limit")));
        }
        if vectors.is_empty() {
            return Err(EngineError::Schedule("no input vectors".into()));
        }
        if let Some(v) = vectors.iter().find(|&&v| u64::from(v) >= 1u64 << n) {
            return Err(EngineError::Schedule(format!("vector {v} exceeds {n} inputs")));
        }
        let s = Self {
            labels: labels.to_vec(),
            vectors,
            window,
            clock_period: 0,
        };
        s.with_clock_period(clock_period)
    }

    /// Re-times the clock so that `window` is an integral number of periods.
    pub fn with_clock_period(mut self, clock_period: usize) -> Result<Self, EngineError> {
        if clock_period < 4 || !clock_period.is_multiple_of(4) || !self.window.is_multiple_of(clock_period) {
            return Err(EngineError::Schedule(format!(
                "clock period {clock_period} must be a multiple of 4 dividing the {}-sample window",
                self.window
            )));
        }
        self.clock_period = clock_period;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[u32] {
        &self.vectors
    }

    /// Samples each vector is held.
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn clock_period(&self) -> usize {
        self.clock_period
    }

    pub fn periods_per_vector(&self) -> usize {
        self.window / self.clock_period
    }

    pub fn num_samples(&self) -> usize {
        self.window * self.vectors.len()
    }

    pub fn vector_at(&self, sample: usize) -> u32 {
        self.vectors[(sample / self.window).min(self.vectors.len() - 1)]
    }

    /// Logic value of bit `label_index` within an input vector.
    pub fn bit(&self, vector: u32, label_index: usize) -> bool {
        let n = self.labels.len();
        (vector >> (n - 1 - label_index)) & 1 == 1
    }

    /// Polarization (`-1` or `+1`) of input `label_index` at `sample`.
    pub fn polarization(&self, label_index: usize, sample: usize) -> f64 {
        if self.bit(self.vector_at(sample), label_index) {
            1.0
        } else {
            -1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
    }

    #[test]
    fn single_input_eight_samples() {
        let s = InputSchedule::exhaustive(&labels(1), 8).unwrap();
        let trace: Vec<f64> = (0..8).map(|t| s.polarization(0, t)).collect();
        assert_eq!(trace, [-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_inputs_binary_counting() {
        let s = InputSchedule::exhaustive(&labels(2), 16).unwrap();
        let visits: Vec<(f64, f64)> = (0..4)
            .map(|k| (s.polarization(0, 4 * k), s.polarization(1, 4 * k)))
            .collect();
        assert_eq!(
            visits,
            [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
        );
    }

    #[test]
    fn indivisible_rejected() {
        assert!(InputSchedule::exhaustive(&labels(2), 20).is_err());
        assert!(InputSchedule::exhaustive(&labels(0), 16).is_err());
        assert!(InputSchedule::exhaustive(&labels(17), 1 << 20).is_err());
    }

    #[test]
    fn clock_period_must_divide_window() {
        let s = InputSchedule::exhaustive(&labels(2), 256).unwrap();
        assert_eq!(s.clock_period(), 64);
        assert!(s.clone().with_clock_period(48).is_err());
        assert!(s.clone().with_clock_period(6).is_err());
        assert_eq!(s.with_clock_period(16).unwrap().periods_per_vector(), 4);
    }
}
