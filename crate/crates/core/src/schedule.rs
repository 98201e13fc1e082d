//! Piecewise-linear water temperature schedule.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("temperature schedule needs at least one point")]
    Empty,
    #[error("schedule point {index} is not finite")]
    NonFinite { index: usize },
    #[error("schedule times must be non-decreasing (point {index})")]
    Unsorted { index: usize },
}

/// `(t_s, temp_c)` knots, held constant before the first and after the last.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSchedule<T> {
    points: Vec<(T, T)>,
}

impl<T: Scalar> TemperatureSchedule<T> {
    pub fn new(points: Vec<(T, T)>) -> Result<Self, ScheduleError> {
        if points.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (index, &(t, c)) in points.iter().enumerate() {
            if !t.is_finite() || !c.is_finite() {
                return Err(ScheduleError::NonFinite { index });
            }
            if index > 0 && t < points[index - 1].0 {
                return Err(ScheduleError::Unsorted { index });
            }
        }
        Ok(Self { points })
    }

    pub fn constant(temp_c: T) -> Self {
        Self {
            points: vec![(T::zero(), temp_c)],
        }
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn temperature_at(&self, t: T) -> T {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        // first knot strictly after t
        let idx = pts.partition_point(|&(ti, _)| ti <= t);
        if idx == pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (t0, c0) = pts[idx - 1];
        let (t1, c1) = pts[idx];
        if t1 == t0 {
            return c1;
        }
        c0 + (c1 - c0) * (t - t0) / (t1 - t0)
    }

    /// Highest temperature reached at or after `t`.
    pub fn max_temperature_from(&self, t: T) -> T {
        self.points
            .iter()
            .filter(|&&(ti, _)| ti > t)
            .fold(self.temperature_at(t), |m, &(_, c)| m.max(c))
    }

    /// Same schedule with every temperature raised by `delta`.
    pub fn shifted(&self, delta: T) -> Self {
        Self {
            points: self.points.iter().map(|&(t, c)| (t, c + delta)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_holds_ends() {
        let s = TemperatureSchedule::new(vec![(10.0, 35.0), (20.0, 60.0), (30.0, 60.0)]).unwrap();
        assert_eq!(s.temperature_at(0.0), 35.0);
        assert_eq!(s.temperature_at(15.0), 47.5);
        assert_eq!(s.temperature_at(20.0), 60.0);
        assert_eq!(s.temperature_at(100.0), 60.0);
        assert_eq!(s.max_temperature_from(0.0), 60.0);
        assert_eq!(s.max_temperature_from(25.0), 60.0);
    }

    #[test]
    fn step_knots() {
        let s = TemperatureSchedule::new(vec![(0.0, 20.0), (5.0, 20.0), (5.0, 70.0)]).unwrap();
        assert_eq!(s.temperature_at(4.9), 20.0);
        assert_eq!(s.temperature_at(5.0), 70.0);
    }

    #[test]
    fn rejects_bad_points() {
        assert_eq!(TemperatureSchedule::<f64>::new(vec![]), Err(ScheduleError::Empty));
        assert_eq!(
            TemperatureSchedule::new(vec![(5.0, 20.0), (1.0, 30.0)]),
            Err(ScheduleError::Unsorted { index: 1 })
        );
        assert!(TemperatureSchedule::new(vec![(0.0, f64::NAN)]).is_err());
    }
}
