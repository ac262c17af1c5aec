use std::fmt;
use std::io::{self, Write};

use crate::energy::energy_per_unit_mass;
use crate::error::{Error, Result};
use crate::models::FollowerModel;

/// Battery channels sampled on the trajectory's time axis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatteryChannels {
    pub current: Vec<f64>,
    pub terminal_voltage: Vec<f64>,
    pub soc: Vec<f64>,
    pub heat: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VehicleSeries {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub accel: Vec<f64>,
    pub battery: Option<BatteryChannels>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    NegativeVelocity,
    OverSpeed,
    SocOutOfRange,
    NegativeHeat,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::NegativeVelocity => "negative_velocity",
            EventKind::OverSpeed => "over_speed",
            EventKind::SocOutOfRange => "soc_out_of_range",
            EventKind::NegativeHeat => "negative_heat",
        })
    }
}

/// A non-fatal violation, logged when it first occurs for a vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub vehicle: usize,
    pub kind: EventKind,
    pub value: f64,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} vehicle={} kind={} value={}",
            sig9(self.time),
            self.vehicle,
            self.kind,
            sig9(self.value)
        )
    }
}

/// Integrated platoon. Vehicle 0 is the lead.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub vehicles: Vec<VehicleSeries>,
    /// Follower models, front to back (no entry for the lead).
    pub models: Vec<FollowerModel>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn followers(&self) -> usize {
        self.vehicles.len() - 1
    }

    pub fn has_battery(&self) -> bool {
        self.vehicles.iter().any(|v| v.battery.is_some())
    }

    /// Spacing `x_{n-1} - x_n` for follower `n` at sample `k`.
    pub fn spacing(&self, n: usize, k: usize) -> f64 {
        self.vehicles[n - 1].position[k] - self.vehicles[n].position[k]
    }

    /// Relative velocity `v_{n-1} - v_n` for follower `n` at sample `k`.
    pub fn relative_velocity(&self, n: usize, k: usize) -> f64 {
        self.vehicles[n - 1].velocity[k] - self.vehicles[n].velocity[k]
    }

    /// Energy per unit mass of vehicle `n`.
    pub fn omega(&self, n: usize, eta: f64) -> Result<f64> {
        let v = self
            .vehicles
            .get(n)
            .ok_or_else(|| Error::Invalid(format!("no vehicle {n}")))?;
        energy_per_unit_mass(&self.times, &v.velocity, &v.accel, eta)
    }

    /// `omega` for every follower, front to back.
    pub fn follower_omegas(&self, eta: f64) -> Result<Vec<f64>> {
        (1..self.vehicles.len()).map(|n| self.omega(n, eta)).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        (1..self.vehicles.len())
            .flat_map(|n| (0..self.len()).map(move |k| (n, k)))
            .map(|(n, k)| self.spacing(n, k))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_follower_velocity(&self) -> f64 {
        self.vehicles[1..]
            .iter()
            .flat_map(|v| v.velocity.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `t,vehicle,x,v,a[,I,V_T,S,Q,V1,V2]`, one row per
    /// (time, vehicle), writing every `stride`-th sample plus the last one.
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize) -> io::Result<()> {
        let stride = stride.max(1);
        let battery = self.has_battery();
        w.write_all(b"t,vehicle,x,v,a")?;
        if battery {
            w.write_all(b",I,V_T,S,Q,V1,V2")?;
        }
        w.write_all(b"\n")?;
        let last = self.len().saturating_sub(1);
        for k in (0..self.len()).filter(|&k| k % stride == 0 || k == last) {
            for (n, veh) in self.vehicles.iter().enumerate() {
                write!(
                    w,
                    "{},{},{},{},{}",
                    sig9(self.times[k]),
                    n,
                    sig9(veh.position[k]),
                    sig9(veh.velocity[k]),
                    sig9(veh.accel[k])
                )?;
                if battery {
                    match &veh.battery {
                        Some(b) => write!(
                            w,
                            ",{},{},{},{},{},{}",
                            sig9(b.current[k]),
                            sig9(b.terminal_voltage[k]),
                            sig9(b.soc[k]),
                            sig9(b.heat[k]),
                            sig9(b.v1[k]),
                            sig9(b.v2[k])
                        )?,
                        None => w.write_all(b",,,,,,")?,
                    }
                }
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    /// One event per line.
    pub fn write_events<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.events {
            writeln!(w, "{e}")?;
        }
        Ok(())
    }
}

/// Format with 9 significant digits, trimming trailing zeros.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.8e}", x);
    // Normalise through parse so short values print plainly (e.g. 0.5).
    let v: f64 = s.parse().unwrap();
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let mut out = format!("{:.*}", decimals, v);
        if out.contains('.') {
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
        out
    } else {
        let (mantissa, exponent) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(70.0), "70");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(-12345.678901234), "-12345.6789");
        assert_eq!(sig9(2.0e-7), "2e-7");
        assert_eq!(sig9(1.234e20), "1.234e20");
        assert_eq!(sig9(0.001), "0.001");
    }
}
