//! Simulation parameter block.

use std::fmt::{self, Write as _};

use thiserror::Error;

/// Parameters of a bistable simulation run. `Default` reproduces the
/// reference simulator's defaults.
///
/// `relaxation_time_s`, `time_step_s` and `layer_separation_nm` are carried
/// for completeness only; the bistable engine has no time-domain dynamics and
/// layouts are single-layer. `temperature_k` is read by the dissipation model,
/// not by the relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub temperature_k: f64,
    pub relaxation_time_s: f64,
    pub time_step_s: f64,
    pub clock_high_j: f64,
    pub clock_low_j: f64,
    pub clock_shift: f64,
    pub clock_amplitude_factor: f64,
    pub radius_of_effect_nm: f64,
    pub relative_permittivity: f64,
    pub layer_separation_nm: f64,
    pub convergence_tolerance: f64,
    pub num_samples: usize,
    pub max_iterations_per_sample: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            temperature_k: 1.0,
            relaxation_time_s: 1.0e-15,
            time_step_s: 1.0e-15,
            clock_high_j: 9.8e-22,
            clock_low_j: 3.8e-23,
            clock_shift: 0.0,
            clock_amplitude_factor: 2.0,
            radius_of_effect_nm: 80.0,
            relative_permittivity: 12.9,
            layer_separation_nm: 11.5,
            convergence_tolerance: 0.001,
            num_samples: 128_000,
            max_iterations_per_sample: 100,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("invalid parameter `{field}`: {reason}")]
pub struct ParamError {
    pub field: &'static str,
    pub reason: String,
}

fn check(ok: bool, field: &'static str, reason: &str) -> Result<(), ParamError> {
    if ok {
        Ok(())
    } else {
        Err(ParamError {
            field,
            reason: reason.to_string(),
        })
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let finite = [
            ("temperature_k", self.temperature_k),
            ("relaxation_time_s", self.relaxation_time_s),
            ("time_step_s", self.time_step_s),
            ("clock_high_j", self.clock_high_j),
            ("clock_low_j", self.clock_low_j),
            ("clock_shift", self.clock_shift),
            ("clock_amplitude_factor", self.clock_amplitude_factor),
            ("radius_of_effect_nm", self.radius_of_effect_nm),
            ("relative_permittivity", self.relative_permittivity),
            ("layer_separation_nm", self.layer_separation_nm),
            ("convergence_tolerance", self.convergence_tolerance),
        ];
        for (field, v) in finite {
            check(v.is_finite(), field, "must be finite")?;
        }
        check(self.clock_low_j > 0.0, "clock_low_j", "must be positive")?;
        check(
            self.clock_low_j < self.clock_high_j,
            "clock_low_j",
            "must be below clock_high_j",
        )?;
        check(
            self.convergence_tolerance > 0.0,
            "convergence_tolerance",
            "must be positive",
        )?;
        check(self.num_samples >= 1, "num_samples", "must be at least 1")?;
        check(
            self.max_iterations_per_sample >= 1,
            "max_iterations_per_sample",
            "must be at least 1",
        )?;
        check(self.temperature_k > 0.0, "temperature_k", "must be positive")?;
        check(
            self.radius_of_effect_nm > 0.0,
            "radius_of_effect_nm",
            "must be positive",
        )?;
        check(
            self.relative_permittivity > 0.0,
            "relative_permittivity",
            "must be positive",
        )?;
        Ok(())
    }

    /// Sets the field called `name` from its textual value. Field names are
    /// the ones printed by [`SimParams::describe`].
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), ParamError> {
        fn num<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<T, ParamError> {
            value.trim().parse().map_err(|_| ParamError {
                field,
                reason: format!("cannot parse {value:?}"),
            })
        }
        match name {
            "temperature_k" => self.temperature_k = num("temperature_k", value)?,
            "relaxation_time_s" => self.relaxation_time_s = num("relaxation_time_s", value)?,
            "time_step_s" => self.time_step_s = num("time_step_s", value)?,
            "clock_high_j" => self.clock_high_j = num("clock_high_j", value)?,
            "clock_low_j" => self.clock_low_j = num("clock_low_j", value)?,
            "clock_shift" => self.clock_shift = num("clock_shift", value)?,
            "clock_amplitude_factor" => {
                self.clock_amplitude_factor = num("clock_amplitude_factor", value)?
            }
            "radius_of_effect_nm" => self.radius_of_effect_nm = num("radius_of_effect_nm", value)?,
            "relative_permittivity" => {
                self.relative_permittivity = num("relative_permittivity", value)?
            }
            "layer_separation_nm" => self.layer_separation_nm = num("layer_separation_nm", value)?,
            "convergence_tolerance" => {
                self.convergence_tolerance = num("convergence_tolerance", value)?
            }
            "num_samples" => self.num_samples = num("num_samples", value)?,
            "max_iterations_per_sample" => {
                self.max_iterations_per_sample = num("max_iterations_per_sample", value)?
            }
            _ => {
                return Err(ParamError {
                    field: "name",
                    reason: format!("unknown parameter {name:?}"),
                })
            }
        }
        Ok(())
    }

    /// `key = value` lines for run headers, in reference-table order.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "temperature_k = {:e}", self.temperature_k);
        let _ = writeln!(s, "relaxation_time_s = {:e}", self.relaxation_time_s);
        let _ = writeln!(s, "time_step_s = {:e}", self.time_step_s);
        let _ = writeln!(s, "clock_high_j = {:e}", self.clock_high_j);
        let _ = writeln!(s, "clock_low_j = {:e}", self.clock_low_j);
        let _ = writeln!(s, "clock_shift = {:e}", self.clock_shift);
        let _ = writeln!(s, "clock_amplitude_factor = {:e}", self.clock_amplitude_factor);
        let _ = writeln!(s, "radius_of_effect_nm = {:e}", self.radius_of_effect_nm);
        let _ = writeln!(s, "relative_permittivity = {:e}", self.relative_permittivity);
        let _ = writeln!(s, "layer_separation_nm = {:e}", self.layer_separation_nm);
        let _ = writeln!(s, "convergence_tolerance = {:e}", self.convergence_tolerance);
        let _ = writeln!(s, "num_samples = {}", self.num_samples);
        let _ = writeln!(
            s,
            "max_iterations_per_sample = {}",
            self.max_iterations_per_sample
        );
        s
    }
}

impl fmt::Display for SimParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_table() {
        let p = SimParams::default();
        assert_eq!(p.temperature_k, 1.0);
        assert_eq!(p.relaxation_time_s, 1.0e-15);
        assert_eq!(p.time_step_s, 1.0e-15);
        assert_eq!(p.clock_high_j, 9.8e-22);
        assert_eq!(p.clock_low_j, 3.8e-23);
        assert_eq!(p.clock_shift, 0.0);
        assert_eq!(p.clock_amplitude_factor, 2.0);
        assert_eq!(p.radius_of_effect_nm, 80.0);
        assert_eq!(p.relative_permittivity, 12.9);
        assert_eq!(p.layer_separation_nm, 11.5);
        assert_eq!(p.convergence_tolerance, 0.001);
        assert_eq!(p.num_samples, 128_000);
        assert_eq!(p.max_iterations_per_sample, 100);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn invariants_enforced() {
        let mut p = SimParams {
            clock_low_j: 1e-21,
            ..SimParams::default()
        };
        assert_eq!(p.validate().unwrap_err().field, "clock_low_j");
        p = SimParams {
            convergence_tolerance: 0.0,
            ..SimParams::default()
        };
        assert_eq!(p.validate().unwrap_err().field, "convergence_tolerance");
        p = SimParams {
            num_samples: 0,
            ..SimParams::default()
        };
        assert_eq!(p.validate().unwrap_err().field, "num_samples");
    }

    #[test]
    fn set_by_name() {
        let mut p = SimParams::default();
        p.set("temperature_k", "4.2").unwrap();
        p.set("max_iterations_per_sample", "7").unwrap();
        assert_eq!(p.temperature_k, 4.2);
        assert_eq!(p.max_iterations_per_sample, 7);
        assert!(p.set("bogus", "1").is_err());
        assert!(p.set("num_samples", "1.5").is_err());
        for line in SimParams::default().describe().lines() {
            let (k, v) = line.split_once(" = ").unwrap();
            let mut q = SimParams::default();
            q.set(k, v).unwrap();
            assert_eq!(q, SimParams::default());
        }
    }

    #[test]
    fn describe_echoes_defaults() {
        let d = SimParams::default().describe();
        assert!(d.contains("clock_high_j = 9.8e-22"));
        assert!(d.contains("clock_low_j = 3.8e-23"));
        assert!(d.contains("num_samples = 128000"));
        assert!(d.contains("relative_permittivity = 1.29e1"));
    }
}
