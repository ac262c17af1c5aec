//! Fixed-step classical Runge-Kutta.

use crate::error::Result;
use crate::lead::Side;

/// A first-order system `y' = f(t, y)`.
///
/// `side` says which one-sided limit to use if `t` sits exactly on a
/// discontinuity of an exogenous input: stages at the end of a step look
/// back (`Left`), all others look forward (`Right`).
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, side: Side, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Classical fourth-order Runge-Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advance `y` from `t` to `t + h` in place. On error `y` is unchanged.
    pub fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, h: f64, y: &mut [f64]) -> Result<()> {
        let half = 0.5 * h;
        sys.rhs(t, Side::Right, y, &mut self.k1)?;
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = y + half * k;
        }
        sys.rhs(t + half, Side::Right, &self.tmp, &mut self.k2)?;
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = y + half * k;
        }
        sys.rhs(t + half, Side::Right, &self.tmp, &mut self.k3)?;
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = y + h * k;
        }
        sys.rhs(t + h, Side::Left, &self.tmp, &mut self.k4)?;
        let sixth = h / 6.0;
        for i in 0..y.len() {
            y[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}
