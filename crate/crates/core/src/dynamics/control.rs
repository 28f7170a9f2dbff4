use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` for one control channel or genome component.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::config(format!("invalid bounds [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    #[inline]
    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// M control channels held constant over each of D steps of length `dt`.
///
/// Values are stored channel-major: all D steps of channel 0, then channel 1,
/// and so on. This is also the genome layout used by the optimizers.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstantControl {
    channels: usize,
    steps: usize,
    dt: f64,
    values: Vec<f64>,
    bounds: Vec<Bounds>,
}

impl PiecewiseConstantControl {
    pub fn new(
        channels: usize,
        steps: usize,
        dt: f64,
        values: Vec<f64>,
        bounds: Vec<Bounds>,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::config("a control needs at least one time step"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("step length must be positive, got {dt}")));
        }
        if values.len() != channels * steps {
            return Err(Error::dim(format!(
                "{} control values for {channels} channels x {steps} steps",
                values.len()
            )));
        }
        if bounds.len() != channels {
            return Err(Error::dim(format!(
                "{} bounds for {channels} channels",
                bounds.len()
            )));
        }
        for (j, b) in bounds.iter().enumerate() {
            let row = &values[j * steps..(j + 1) * steps];
            if let Some((k, v)) = row.iter().enumerate().find(|(_, v)| !b.contains(**v)) {
                return Err(Error::config(format!(
                    "control value {v} at channel {j}, step {k} is outside [{}, {}]",
                    b.lo, b.hi
                )));
            }
        }
        Ok(Self {
            channels,
            steps,
            dt,
            values,
            bounds,
        })
    }

    /// All-zero control; the bounds must admit zero.
    pub fn zeros(channels: usize, steps: usize, dt: f64, bounds: Vec<Bounds>) -> Result<Self> {
        Self::new(channels, steps, dt, vec![0.0; channels * steps], bounds)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// T = D·dt
    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    #[inline]
    pub fn value(&self, channel: usize, step: usize) -> f64 {
        self.values[channel * self.steps + step]
    }

    /// Amplitudes of every channel during `step`.
    pub fn at_step(&self, step: usize, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate().take(self.channels) {
            *o = self.value(j, step);
        }
    }
}

/// Multipliers (θ_0, θ_1, …, θ_M) on the drift and each control Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyTuple(Vec<f64>);

impl UncertaintyTuple {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::dim("an uncertainty tuple carries at least θ_0"));
        }
        if let Some(t) = thetas.iter().find(|t| !t.is_finite()) {
            return Err(Error::config(format!("non-finite multiplier {t}")));
        }
        Ok(Self(thetas))
    }

    /// All multipliers equal to one.
    pub fn nominal(channels: usize) -> Self {
        Self(vec![1.0; channels + 1])
    }

    /// Validates membership in [1 − E, 1 + E].
    pub fn check_bound(&self, e: f64) -> Result<()> {
        match self.0.iter().find(|t| (**t - 1.0).abs() > e + 1e-12) {
            Some(t) => Err(Error::config(format!("multiplier {t} outside [1-{e}, 1+{e}]"))),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn drift(&self) -> f64 {
        self.0[0]
    }

    /// θ_j for control channel j (0-based).
    #[inline]
    pub fn control(&self, j: usize) -> f64 {
        self.0[j + 1]
    }

    pub fn channels(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(lo: f64, hi: f64) -> Bounds {
        Bounds::new(lo, hi).unwrap()
    }

    #[test]
    fn rejects_out_of_bounds_values() {
        let err = PiecewiseConstantControl::new(1, 2, 0.1, vec![0.0, 11.0], vec![b(-10., 10.)]);
        assert!(err.is_err());
        let ok = PiecewiseConstantControl::new(1, 2, 0.1, vec![0.0, 10.0], vec![b(-10., 10.)]);
        assert!(ok.is_ok());
    }

    #[test]
    fn layout_is_channel_major() {
        let c = PiecewiseConstantControl::new(2, 3, 0.5, vec![1., 2., 3., 4., 5., 6.], vec![b(0., 9.); 2])
            .unwrap();
        assert_eq!(c.value(1, 0), 4.0);
        assert_eq!(c.horizon(), 1.5);
        let mut buf = [0.0; 2];
        c.at_step(2, &mut buf);
        assert_eq!(buf, [3.0, 6.0]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(PiecewiseConstantControl::new(1, 0, 0.1, vec![], vec![b(0., 1.)]).is_err());
        assert!(PiecewiseConstantControl::new(1, 1, 0.0, vec![0.], vec![b(0., 1.)]).is_err());
        assert!(PiecewiseConstantControl::new(2, 1, 0.1, vec![0.], vec![b(0., 1.); 2]).is_err());
        assert!(Bounds::new(1.0, 0.0).is_err());
    }

    #[test]
    fn uncertainty_bounds() {
        let t = UncertaintyTuple::new(vec![0.8, 1.2]).unwrap();
        assert!(t.check_bound(0.2).is_ok());
        assert!(t.check_bound(0.1).is_err());
        assert!(UncertaintyTuple::new(vec![]).is_err());
    }
}
