//! Driver fatigue as a sum of Gaussian bumps over per-phase driving time.
//!
//! Morning driving contributes one bump, afternoon driving two, night
//! driving three. Coefficients come from a KSS-calibrated study and are kept
//! verbatim, including the repeated afternoon/night triples.

use serde::{Deserialize, Serialize};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Amplitudes, centers (s) and widths (s) of the six Gaussian terms.
/// Term 1 is the morning term, 2–3 afternoon, 4–6 night.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FatigueCoefficients {
    pub alpha: [f64; 6],
    pub beta: [f64; 6],
    pub epsilon: [f64; 6],
}

impl Default for FatigueCoefficients {
    fn default() -> Self {
        FatigueCoefficients {
            alpha: [60.83, 22.1, 92.1, 2.599, 92.1, 22.1],
            beta: [8834.0, 9675.0, 1.382e4, 5046.0, 1.382e4, 9675.0],
            epsilon: [4760.0, 6142.0, 6358.0, 1257.0, 6358.0, 6142.0],
        }
    }
}

impl FatigueCoefficients {
    #[inline]
    fn term(&self, i: usize, t: f64) -> f64 {
        let z = (t - self.beta[i]) / self.epsilon[i];
        self.alpha[i] * (-(z * z)).exp()
    }
}

/// Clock boundaries (seconds after midnight) of the three driving phases.
/// Morning is `[morning_start, afternoon_start)`, afternoon is
/// `[afternoon_start, night_start)` and night wraps through midnight back to
/// `morning_start`, so the phases always partition the day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DayPhaseSchedule {
    pub morning_start: f64,
    pub afternoon_start: f64,
    pub night_start: f64,
    /// Default departure clock time for vehicles that do not set their own.
    pub journey_start: f64,
}

impl Default for DayPhaseSchedule {
    fn default() -> Self {
        DayPhaseSchedule {
            morning_start: 6.0 * 3600.0,
            afternoon_start: 12.0 * 3600.0,
            night_start: 18.0 * 3600.0,
            journey_start: 8.0 * 3600.0,
        }
    }
}

impl DayPhaseSchedule {
    pub fn is_valid(&self) -> bool {
        0.0 <= self.morning_start
            && self.morning_start < self.afternoon_start
            && self.afternoon_start < self.night_start
            && self.night_start < SECONDS_PER_DAY
            && (0.0..SECONDS_PER_DAY).contains(&self.journey_start)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSplit {
    pub morning: f64,
    pub afternoon: f64,
    pub night: f64,
}

impl PhaseSplit {
    pub fn total(&self) -> f64 {
        self.morning + self.afternoon + self.night
    }

    /// Adds `duration` seconds of driving that starts at clock time `start`
    /// (seconds after midnight, any day).
    pub fn accumulate(&mut self, start: f64, duration: f64, schedule: &DayPhaseSchedule) {
        let (m, a, n) = (
            schedule.morning_start,
            schedule.afternoon_start,
            schedule.night_start,
        );
        let full_days = (duration / SECONDS_PER_DAY).floor();
        if full_days > 0.0 {
            self.morning += full_days * (a - m);
            self.afternoon += full_days * (n - a);
            self.night += full_days * (SECONDS_PER_DAY - (n - m));
        }
        let mut remaining = duration - full_days * SECONDS_PER_DAY;
        let mut t = start.rem_euclid(SECONDS_PER_DAY);
        while remaining > 0.0 {
            let (slot, next) = if t < m {
                (&mut self.night, m)
            } else if t < a {
                (&mut self.morning, a)
            } else if t < n {
                (&mut self.afternoon, n)
            } else {
                (&mut self.night, SECONDS_PER_DAY + m)
            };
            let piece = remaining.min(next - t);
            *slot += piece;
            remaining -= piece;
            t = next.rem_euclid(SECONDS_PER_DAY);
        }
    }
}

/// Splits `duration` seconds of driving that starts at clock time `start`
/// into morning, afternoon and night driving time.
pub fn split_driving_time(start: f64, duration: f64, schedule: &DayPhaseSchedule) -> PhaseSplit {
    let mut split = PhaseSplit::default();
    split.accumulate(start, duration.max(0.0), schedule);
    split
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FatigueComponents {
    pub morning: f64,
    pub afternoon: f64,
    pub night: f64,
}

impl FatigueComponents {
    pub fn total(&self) -> f64 {
        self.morning + self.afternoon + self.night
    }
}

pub fn fatigue_components(split: &PhaseSplit, coeffs: &FatigueCoefficients) -> FatigueComponents {
    FatigueComponents {
        morning: coeffs.term(0, split.morning),
        afternoon: coeffs.term(1, split.afternoon) + coeffs.term(2, split.afternoon),
        night: coeffs.term(3, split.night) + coeffs.term(4, split.night) + coeffs.term(5, split.night),
    }
}

pub fn fatigue_total(split: &PhaseSplit, coeffs: &FatigueCoefficients) -> f64 {
    fatigue_components(split, coeffs).total()
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 3600.0;

    fn split(m: f64, a: f64, n: f64) -> PhaseSplit {
        PhaseSplit {
            morning: m,
            afternoon: a,
            night: n,
        }
    }

    #[test]
    fn split_examples() {
        let s = DayPhaseSchedule::default();
        assert_eq!(split_driving_time(8.0 * H, 2.0 * H, &s), split(7200.0, 0.0, 0.0));
        assert_eq!(split_driving_time(11.0 * H, 2.0 * H, &s), split(3600.0, 3600.0, 0.0));
        assert_eq!(
            split_driving_time(8.0 * H, 24.0 * H, &s),
            split(21600.0, 21600.0, 43200.0)
        );
        assert_eq!(split_driving_time(8.0 * H, 0.0, &s), PhaseSplit::default());
    }

    #[test]
    fn split_wraps_through_midnight() {
        let s = DayPhaseSchedule::default();
        // 17:00 for 15 h: 1 h afternoon, 12 h night, 2 h morning
        assert_eq!(
            split_driving_time(17.0 * H, 15.0 * H, &s),
            split(2.0 * H, 1.0 * H, 12.0 * H)
        );
        // 03:00 for 4 h: 3 h night then 1 h morning
        assert_eq!(split_driving_time(3.0 * H, 4.0 * H, &s), split(H, 0.0, 3.0 * H));
    }

    #[test]
    fn morning_peak_and_zero_value() {
        let c = FatigueCoefficients::default();
        let at_peak = fatigue_components(&split(8834.0, 0.0, 0.0), &c);
        assert_eq!(at_peak.morning, 60.83);
        // independent scalar evaluation of the morning Gaussian at t = 0
        let expected = 60.83 * (-(8834.0f64 / 4760.0).powi(2)).exp();
        let at_zero = fatigue_components(&PhaseSplit::default(), &c);
        assert!((at_zero.morning - expected).abs() <= 1e-12 * expected);
        assert!((at_zero.morning - 1.94).abs() < 0.005);
    }

    #[test]
    fn tails_vanish() {
        let c = FatigueCoefficients::default();
        let f = fatigue_components(&split(1e7, 1e7, 1e7), &c);
        assert!(f.morning < 1e-12 && f.afternoon < 1e-12 && f.night < 1e-12);
    }

    #[test]
    fn total_is_the_component_sum() {
        let c = FatigueCoefficients::default();
        let s = split(1000.0, 20000.0, 3000.0);
        let parts = fatigue_components(&s, &c);
        assert_eq!(fatigue_total(&s, &c), parts.morning + parts.afternoon + parts.night);
    }

    #[test]
    fn all_zero_times_match_scalar_evaluation() {
        let g = |a: f64, b: f64, e: f64| a * (-(b / e).powi(2)).exp();
        let expected = g(60.83, 8834.0, 4760.0)
            + (g(22.1, 9675.0, 6142.0) + g(92.1, 13820.0, 6358.0))
            + (g(2.599, 5046.0, 1257.0) + g(92.1, 13820.0, 6358.0) + g(22.1, 9675.0, 6142.0));
        let got = fatigue_total(&PhaseSplit::default(), &FatigueCoefficients::default());
        assert!((got - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn phases_are_not_interchangeable() {
        let c = FatigueCoefficients::default();
        let a = fatigue_total(&split(0.0, 5046.0, 0.0), &c);
        let b = fatigue_total(&split(0.0, 0.0, 5046.0), &c);
        assert_ne!(a, b);
    }
}
