//! Annealing paths s(t) ∈ [0, 1] over a horizon T.
//!
//! Four families are supported:
//!
//! * `Continuous`: piecewise constant on M equal sub-intervals; the
//!   discretized stand-in for an arbitrary continuous path.
//! * `Linear`: s(t) = s1 + (s2 - s1)·t/T with free endpoints.
//! * `Qaoa`: bang-bang path with p layers: s alternates 1 and 0 at the
//!   ordered breakpoints t = s_1 ≤ … ≤ s_2p, and the state is frozen on
//!   [s_2p, T] (handled by the dynamics; `value_at` reports 0 there).
//! * `AnnealerPiecewise`: hardware-style ramp anchored at s(0) = 0,
//!   s(0.1T) = s1, s(0.9T) = s2, s(T) = 1, linear between anchors.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Fraction of the horizon at which the first/last piecewise anchor sits.
const ANCHOR_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Schedule {
    Continuous {
        /// s value on each of the M equal sub-intervals.
        values: Vec<f64>,
        #[cfg_attr(feature = "serde", serde(rename = "T"))]
        horizon: f64,
    },
    Linear {
        s1: f64,
        s2: f64,
        #[cfg_attr(feature = "serde", serde(rename = "T"))]
        horizon: f64,
    },
    Qaoa {
        /// 2p ordered breakpoint times in [0, T].
        breakpoints: Vec<f64>,
        #[cfg_attr(feature = "serde", serde(rename = "T"))]
        horizon: f64,
    },
    AnnealerPiecewise {
        s1: f64,
        s2: f64,
        #[cfg_attr(feature = "serde", serde(rename = "T"))]
        horizon: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleError {
    TimeOutOfRange { t: f64, horizon: f64 },
    Invalid(Vec<Violation>),
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::TimeOutOfRange { t, horizon } => {
                write!(f, "time {t} outside [0, {horizon}]")
            }
            ScheduleError::Invalid(violations) => {
                write!(f, "invalid schedule:")?;
                for v in violations {
                    write!(f, " {v};")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ScheduleError {}

/// One broken schedule invariant, reported by [`Schedule::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveHorizon(f64),
    ValueOutOfRange {
        which: String,
        value: f64,
    },
    BreakpointOrder {
        index: usize,
        prev: f64,
        next: f64,
    },
    BreakpointOutOfRange {
        index: usize,
        value: f64,
        horizon: f64,
    },
    EmptySchedule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveHorizon(t) => write!(f, "horizon T = {t} must be positive"),
            Violation::ValueOutOfRange { which, value } => {
                write!(f, "{which} = {value} outside [0, 1]")
            }
            Violation::BreakpointOrder { index, prev, next } => {
                write!(f, "s_{} = {next} < s_{index} = {prev}", index + 1)
            }
            Violation::BreakpointOutOfRange {
                index,
                value,
                horizon,
            } => {
                write!(f, "s_{} = {value} outside [0, {horizon}]", index + 1)
            }
            Violation::EmptySchedule => write!(f, "schedule has no values"),
        }
    }
}

impl Schedule {
    /// Linear path from s(0) = 0 to s(T) = 1: the fixed-path baseline.
    pub fn standard_ramp(horizon: f64) -> Self {
        Schedule::Linear {
            s1: 0.0,
            s2: 1.0,
            horizon,
        }
    }

    pub fn horizon(&self) -> f64 {
        match self {
            Schedule::Continuous { horizon, .. }
            | Schedule::Linear { horizon, .. }
            | Schedule::Qaoa { horizon, .. }
            | Schedule::AnnealerPiecewise { horizon, .. } => *horizon,
        }
    }

    /// Number of QAOA layers (half the breakpoint count); 0 otherwise.
    pub fn layers(&self) -> usize {
        match self {
            Schedule::Qaoa { breakpoints, .. } => breakpoints.len() / 2,
            _ => 0,
        }
    }

    /// s(t) for t in [0, T].
    pub fn value_at(&self, t: f64) -> Result<f64, ScheduleError> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(ScheduleError::TimeOutOfRange { t, horizon });
        }
        Ok(match self {
            Schedule::Continuous { values, horizon } => {
                let m = values.len();
                let idx = ((t / horizon * m as f64) as usize).min(m - 1);
                values[idx]
            }
            Schedule::Linear { s1, s2, horizon } => s1 + (s2 - s1) * t / horizon,
            Schedule::Qaoa { breakpoints, .. } => {
                // s = 1 on [s_{2l-2}, s_{2l-1}), 0 on [s_{2l-1}, s_{2l}),
                // with s_0 = 0, and 0 past the last breakpoint.
                match breakpoints.iter().position(|&b| t < b) {
                    Some(k) if k % 2 == 0 => 1.0,
                    _ => 0.0,
                }
            }
            Schedule::AnnealerPiecewise { s1, s2, horizon } => {
                let t1 = ANCHOR_FRACTION * horizon;
                let t2 = (1.0 - ANCHOR_FRACTION) * horizon;
                if t < t1 {
                    s1 * t / t1
                } else if t < t2 {
                    s1 + (s2 - s1) * (t - t1) / (t2 - t1)
                } else {
                    s2 + (1.0 - s2) * (t - t2) / (horizon - t2)
                }
            }
        })
    }

    /// Every violated invariant; empty means the schedule is valid.
    pub fn validate(&self) -> Vec<Violation> {
        fn check_unit(v: &mut Vec<Violation>, which: String, value: f64) {
            if !(0.0..=1.0).contains(&value) {
                v.push(Violation::ValueOutOfRange { which, value });
            }
        }

        let mut v = Vec::new();
        let horizon = self.horizon();
        if !(horizon > 0.0) {
            v.push(Violation::NonPositiveHorizon(horizon));
        }
        match self {
            Schedule::Continuous { values, .. } => {
                if values.is_empty() {
                    v.push(Violation::EmptySchedule);
                }
                for (i, &s) in values.iter().enumerate() {
                    check_unit(&mut v, alloc::format!("s[{i}]"), s);
                }
            }
            Schedule::Linear { s1, s2, .. } | Schedule::AnnealerPiecewise { s1, s2, .. } => {
                check_unit(&mut v, String::from("s1"), *s1);
                check_unit(&mut v, String::from("s2"), *s2);
            }
            Schedule::Qaoa {
                breakpoints,
                horizon,
            } => {
                let mut prev = 0.0;
                for (i, &b) in breakpoints.iter().enumerate() {
                    if b < prev {
                        v.push(Violation::BreakpointOrder {
                            index: i,
                            prev,
                            next: b,
                        });
                    }
                    if !(0.0..=*horizon).contains(&b) {
                        v.push(Violation::BreakpointOutOfRange {
                            index: i,
                            value: b,
                            horizon: *horizon,
                        });
                    }
                    prev = b;
                }
            }
        }
        v
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Clips s values to [0, 1]; sorts QAOA breakpoints and clips them to
    /// [0, T]. Idempotent, and the identity on valid schedules.
    pub fn clamp_project(&self) -> Schedule {
        let mut s = self.clone();
        match &mut s {
            Schedule::Continuous { values, .. } => {
                for v in values.iter_mut() {
                    *v = v.clamp(0.0, 1.0);
                }
            }
            Schedule::Linear { s1, s2, .. } | Schedule::AnnealerPiecewise { s1, s2, .. } => {
                *s1 = s1.clamp(0.0, 1.0);
                *s2 = s2.clamp(0.0, 1.0);
            }
            Schedule::Qaoa {
                breakpoints,
                horizon,
            } => {
                breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
                for b in breakpoints.iter_mut() {
                    *b = b.clamp(0.0, *horizon);
                }
            }
        }
        s
    }

    /// End of actual time evolution: the last breakpoint for QAOA paths
    /// (the state is frozen afterwards), T for every other family.
    pub fn evolution_end(&self) -> f64 {
        match self {
            Schedule::Qaoa { breakpoints, .. } => breakpoints.last().copied().unwrap_or(0.0),
            _ => self.horizon(),
        }
    }

    /// Times in [0, evolution_end] where s(t) is non-smooth. Integrators
    /// split steps at these points so discontinuities never fall inside a
    /// step.
    pub fn segment_boundaries(&self) -> Vec<f64> {
        let end = self.evolution_end();
        let mut pts = match self {
            Schedule::Continuous { values, horizon } => {
                let m = values.len();
                (0..=m).map(|k| k as f64 / m as f64 * horizon).collect()
            }
            Schedule::Linear { horizon, .. } => alloc::vec![0.0, *horizon],
            Schedule::Qaoa { breakpoints, .. } => {
                let mut p: Vec<f64> = Vec::with_capacity(breakpoints.len() + 1);
                p.push(0.0);
                p.extend_from_slice(breakpoints);
                p
            }
            Schedule::AnnealerPiecewise { horizon, .. } => alloc::vec![
                0.0,
                ANCHOR_FRACTION * horizon,
                (1.0 - ANCHOR_FRACTION) * horizon,
                *horizon
            ],
        };
        pts.retain(|&t| t <= end);
        if pts.last().copied() != Some(end) {
            pts.push(end);
        }
        pts.dedup();
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_linear_path() {
        let s = Schedule::Linear {
            s1: 0.5,
            s2: 0.5,
            horizon: 2.0,
        };
        for &t in &[0.0, 0.3, 1.7, 2.0] {
            assert_eq!(s.value_at(t).unwrap(), 0.5);
        }
    }

    #[test]
    fn reversed_linear_midpoint() {
        // the optimal short-horizon path runs from s = 1 down to s = 0
        let s = Schedule::Linear {
            s1: 1.0,
            s2: 0.0,
            horizon: 0.1,
        };
        assert_eq!(s.value_at(0.05).unwrap(), 0.5);
    }

    #[test]
    fn qaoa_alternates_one_and_zero() {
        let s = Schedule::Qaoa {
            breakpoints: vec![0.3, 0.7],
            horizon: 1.0,
        };
        assert_eq!(s.value_at(0.1).unwrap(), 1.0);
        assert_eq!(s.value_at(0.5).unwrap(), 0.0);
        assert_eq!(s.value_at(0.9).unwrap(), 0.0); // frozen tail
        assert_eq!(s.evolution_end(), 0.7);
    }

    #[test]
    fn continuous_picks_sub_interval_value() {
        let s = Schedule::Continuous {
            values: vec![0.1, 0.9, 0.4],
            horizon: 3.0,
        };
        assert_eq!(s.value_at(0.5).unwrap(), 0.1);
        assert_eq!(s.value_at(1.5).unwrap(), 0.9);
        assert_eq!(s.value_at(2.999).unwrap(), 0.4);
        assert_eq!(s.value_at(3.0).unwrap(), 0.4); // right endpoint closed
    }

    #[test]
    fn annealer_path_hits_anchors() {
        let s = Schedule::AnnealerPiecewise {
            s1: 0.3,
            s2: 0.8,
            horizon: 5.0,
        };
        assert_eq!(s.value_at(0.0).unwrap(), 0.0);
        assert!((s.value_at(0.5).unwrap() - 0.3).abs() < 1e-12);
        assert!((s.value_at(4.5).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(s.value_at(5.0).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_time_is_an_error() {
        let s = Schedule::standard_ramp(1.0);
        assert!(matches!(
            s.value_at(-0.1),
            Err(ScheduleError::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            s.value_at(1.1),
            Err(ScheduleError::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn validate_reports_each_violation() {
        let s = Schedule::Qaoa {
            breakpoints: vec![0.5, 0.3],
            horizon: 1.0,
        };
        let v = s.validate();
        assert_eq!(
            v,
            vec![Violation::BreakpointOrder {
                index: 1,
                prev: 0.5,
                next: 0.3
            }]
        );

        let s = Schedule::Linear {
            s1: 1.2,
            s2: 0.5,
            horizon: 1.0,
        };
        assert_eq!(
            s.validate(),
            vec![Violation::ValueOutOfRange {
                which: String::from("s1"),
                value: 1.2
            }]
        );

        let s = Schedule::Continuous {
            values: vec![0.5; 4],
            horizon: 1.0,
        };
        assert!(s.is_valid());
    }

    #[test]
    fn clamp_project_restores_validity_and_is_idempotent() {
        let s = Schedule::Linear {
            s1: -0.1,
            s2: 1.3,
            horizon: 1.0,
        };
        let p = s.clamp_project();
        assert_eq!(
            p,
            Schedule::Linear {
                s1: 0.0,
                s2: 1.0,
                horizon: 1.0
            }
        );
        assert_eq!(p.clamp_project(), p);

        let s = Schedule::Qaoa {
            breakpoints: vec![0.8, 0.2],
            horizon: 1.0,
        };
        let p = s.clamp_project();
        assert_eq!(
            p,
            Schedule::Qaoa {
                breakpoints: vec![0.2, 0.8],
                horizon: 1.0
            }
        );
        assert_eq!(p.clamp_project(), p);
    }

    #[test]
    fn values_stay_in_the_unit_interval_for_valid_schedules() {
        let schedules = [
            Schedule::Linear {
                s1: 0.9,
                s2: 0.1,
                horizon: 2.0,
            },
            Schedule::AnnealerPiecewise {
                s1: 0.7,
                s2: 0.2,
                horizon: 2.0,
            },
            Schedule::Continuous {
                values: vec![0.0, 1.0, 0.3, 0.8],
                horizon: 2.0,
            },
            Schedule::Qaoa {
                breakpoints: vec![0.5, 1.0, 1.2, 1.9],
                horizon: 2.0,
            },
        ];
        for sch in &schedules {
            assert!(sch.is_valid());
            for k in 0..=200 {
                let t = 2.0 * k as f64 / 200.0;
                let s = sch.value_at(t).unwrap();
                assert!((0.0..=1.0).contains(&s), "{sch:?} at t={t} gave {s}");
            }
        }
    }

    #[test]
    fn segments_cover_the_evolution_window() {
        let s = Schedule::Continuous {
            values: vec![0.5; 4],
            horizon: 2.0,
        };
        assert_eq!(s.segment_boundaries(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);

        let s = Schedule::Qaoa {
            breakpoints: vec![0.25, 0.5],
            horizon: 1.0,
        };
        assert_eq!(s.segment_boundaries(), vec![0.0, 0.25, 0.5]);

        let s = Schedule::standard_ramp(1.0);
        assert_eq!(s.segment_boundaries(), vec![0.0, 1.0]);
    }
}
