use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleState {
    pub position: f64,
    pub velocity: f64,
}

impl VehicleState {
    pub const fn new(position: f64, velocity: f64) -> Self {
        Self { position, velocity }
    }
}

/// Snapshot of a platoon. Vehicle 0 is the lead; followers are ordered
/// front to back.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatoonState {
    pub time: f64,
    pub lead: VehicleState,
    pub followers: Vec<VehicleState>,
}

impl PlatoonState {
    pub fn new(time: f64, lead: VehicleState, followers: Vec<VehicleState>) -> Self {
        Self {
            time,
            lead,
            followers,
        }
    }

    /// Lead plus `count` followers at fixed `spacing`, all at `velocity`.
    pub fn evenly_spaced(
        lead: VehicleState,
        first_spacing: f64,
        spacing: f64,
        count: usize,
        velocity: f64,
    ) -> Self {
        let mut followers = Vec::with_capacity(count);
        let mut x = lead.position;
        for n in 0..count {
            x -= if n == 0 { first_spacing } else { spacing };
            followers.push(VehicleState::new(x, velocity));
        }
        Self::new(0.0, lead, followers)
    }

    pub fn vehicle(&self, index: usize) -> Option<&VehicleState> {
        if index == 0 {
            Some(&self.lead)
        } else {
            self.followers.get(index - 1)
        }
    }

    pub fn len(&self) -> usize {
        1 + self.followers.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Gap between vehicle `n - 1` and vehicle `n`, for `n` in `1..len()`.
    pub fn spacing(&self, n: usize) -> f64 {
        let front = self.vehicle(n - 1).expect("front vehicle");
        let back = self.vehicle(n).expect("back vehicle");
        front.position - back.position
    }

    pub fn spacings(&self) -> impl Iterator<Item = f64> + '_ {
        (1..self.len()).map(|n| self.spacing(n))
    }

    /// Positive spacing everywhere and every velocity within `[0, v_max]`.
    pub fn validate_initial(&self, v_max: f64) -> Result<()> {
        if self.followers.is_empty() {
            return Err(Error::Invalid("platoon needs at least one follower".into()));
        }
        for n in 0..self.len() {
            let s = self.vehicle(n).unwrap();
            if !s.position.is_finite() || !s.velocity.is_finite() {
                return Err(Error::Invalid(format!("vehicle {n} has a non-finite state")));
            }
            if s.velocity < 0.0 || s.velocity > v_max {
                return Err(Error::Invalid(format!(
                    "vehicle {n} initial velocity {} outside [0, {v_max}]",
                    s.velocity
                )));
            }
        }
        for n in 1..self.len() {
            let gap = self.spacing(n);
            if gap <= 0.0 {
                return Err(Error::Invalid(format!(
                    "initial spacing between vehicles {} and {n} is {gap}, must be positive",
                    n - 1
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evenly_spaced_layout() {
        let p = PlatoonState::evenly_spaced(VehicleState::new(0.0, 1.7), 0.3, 3.5, 5, 1.87);
        let gaps: Vec<f64> = p.spacings().collect();
        assert_eq!(gaps.len(), 5);
        assert!((gaps[0] - 0.3).abs() < 1e-12);
        for g in &gaps[1..] {
            assert!((g - 3.5).abs() < 1e-12);
        }
        assert!(p.validate_initial(1.964).is_ok());
    }

    #[test]
    fn rejects_overlap_and_speed() {
        let p = PlatoonState::new(
            0.0,
            VehicleState::new(0.0, 1.0),
            vec![VehicleState::new(0.5, 1.0)],
        );
        assert!(p.validate_initial(1.964).is_err());
        let p = PlatoonState::new(
            0.0,
            VehicleState::new(1.0, 1.0),
            vec![VehicleState::new(0.0, 2.5)],
        );
        assert!(p.validate_initial(1.964).is_err());
    }
}
