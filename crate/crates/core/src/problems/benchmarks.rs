use super::RobustProblem;
use crate::dynamics::Bounds;
use crate::error::{Error, Result};

fn check_len(genome: &[f64], dim: usize) -> Result<()> {
    if genome.len() != dim {
        return Err(Error::dim(format!("genome has {} values, expected {dim}", genome.len())));
    }
    Ok(())
}

/// Maximize −‖x‖² on [−5.12, 5.12]^dim. No uncertain parameters.
#[derive(Clone, Debug)]
pub struct Sphere {
    bounds: Vec<Bounds>,
}

impl Sphere {
    pub const DEFAULT_DIM: usize = 30;
    pub const HALF_WIDTH: f64 = 5.12;

    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("sphere dimension must be at least 1"));
        }
        Ok(Self {
            bounds: vec![Bounds::new(-Self::HALF_WIDTH, Self::HALF_WIDTH)?; dim],
        })
    }
}

impl RobustProblem for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }

    fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    fn uncertain_params(&self) -> usize {
        0
    }

    fn uncertainty_bound(&self) -> f64 {
        0.0
    }

    fn fitness(&self, genome: &[f64], _theta: &[f64]) -> Result<f64> {
        check_len(genome, self.bounds.len())?;
        Ok(-genome.iter().map(|x| x * x).sum::<f64>())
    }
}

/// Negated Rastrigin with two uncertain multipliers: θ_1 scales the argument
/// and θ_2 the cosine frequency,
/// f(x) = −Σ [(θ_1 x)² − 10 cos(2π θ_2 θ_1 x) + 10].
#[derive(Clone, Debug)]
pub struct NoisyLandscape {
    bounds: Vec<Bounds>,
    uncertainty_bound: f64,
}

impl NoisyLandscape {
    pub const DEFAULT_DIM: usize = 10;
    pub const DEFAULT_UNCERTAINTY: f64 = 0.05;

    pub fn new(dim: usize, uncertainty_bound: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("landscape dimension must be at least 1"));
        }
        if !(0.0..=1.0).contains(&uncertainty_bound) {
            return Err(Error::config("uncertainty bound must lie in [0, 1]"));
        }
        Ok(Self {
            bounds: vec![Bounds::new(-5.12, 5.12)?; dim],
            uncertainty_bound,
        })
    }
}

impl RobustProblem for NoisyLandscape {
    fn name(&self) -> &str {
        "noisy-landscape"
    }

    fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    fn uncertain_params(&self) -> usize {
        2
    }

    fn uncertainty_bound(&self) -> f64 {
        self.uncertainty_bound
    }

    fn fitness(&self, genome: &[f64], theta: &[f64]) -> Result<f64> {
        check_len(genome, self.bounds.len())?;
        let &[t1, t2] = theta else {
            return Err(Error::dim(format!("landscape samples carry 2 values, got {}", theta.len())));
        };
        let tau = std::f64::consts::TAU;
        Ok(-genome
            .iter()
            .map(|x| {
                let s = t1 * x;
                s * s - 10.0 * (tau * t2 * s).cos() + 10.0
            })
            .sum::<f64>())
    }
}
