use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::Bounds;
use crate::error::{Error, Result};

/// How perturbed copies of a genome are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum NoiseMode {
    /// Three samples: the genome, a copy shifted up by fraction·range·rand(0,1)
    /// per component, and a copy shifted down by the same law.
    Training,
    /// `count` copies, each shifted by fraction·range·(2·rand(0,1) − 1).
    Testing { count: usize },
}

/// Perturbed copies of `genome`, clamped to `bounds`. Draws are taken sample
/// by sample, component by component.
pub fn additive_noise_samples<R: Rng + ?Sized>(
    genome: &[f64],
    bounds: &[Bounds],
    fraction: f64,
    mode: NoiseMode,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::config(format!("noise fraction must lie in [0, 1), got {fraction}")));
    }
    if genome.len() != bounds.len() {
        return Err(Error::dim(format!(
            "genome has {} values but {} bounds",
            genome.len(),
            bounds.len()
        )));
    }
    let shifted = |sign: Option<f64>, rng: &mut R| -> Vec<f64> {
        genome
            .iter()
            .zip(bounds)
            .map(|(x, b)| {
                let r: f64 = rng.random();
                let offset = match sign {
                    Some(s) => s * r,
                    None => 2.0 * r - 1.0,
                };
                b.clamp(x + fraction * b.range() * offset)
            })
            .collect()
    };
    Ok(match mode {
        NoiseMode::Training => {
            let up = shifted(Some(1.0), rng);
            let down = shifted(Some(-1.0), rng);
            vec![genome.to_vec(), up, down]
        }
        NoiseMode::Testing { count } => (0..count).map(|_| shifted(None, rng)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Vec<f64>, Vec<Bounds>) {
        let b = Bounds::new(-10.0, 10.0).unwrap();
        ((0..50).map(|k| (k as f64 * 0.3).sin() * 5.0).collect(), vec![b; 50])
    }

    #[test]
    fn zero_fraction_is_identity() {
        let (g, b) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in additive_noise_samples(&g, &b, 0.0, NoiseMode::Testing { count: 5 }, &mut rng).unwrap() {
            assert_eq!(s, g);
        }
    }

    #[test]
    fn training_offsets_are_one_sided() {
        let (g, b) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = additive_noise_samples(&g, &b, 0.05, NoiseMode::Training, &mut rng).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], g);
        for j in 0..g.len() {
            let up = s[1][j] - g[j];
            let down = s[2][j] - g[j];
            assert!((0.0..=1.0 + 1e-12).contains(&up));
            assert!((-1.0 - 1e-12..=0.0).contains(&down));
        }
    }

    #[test]
    fn testing_offsets_are_symmetric_and_clamped() {
        let (mut g, b) = setup();
        g[0] = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = additive_noise_samples(&g, &b, 0.075, NoiseMode::Testing { count: 100 }, &mut rng).unwrap();
        assert_eq!(s.len(), 100);
        let mut saw_neg = false;
        for v in &s {
            for j in 0..g.len() {
                let d = v[j] - g[j];
                assert!(d.abs() <= 1.5 + 1e-12);
                assert!(b[j].contains(v[j]));
                saw_neg |= d < 0.0;
            }
        }
        assert!(saw_neg);
    }

    #[test]
    fn rejects_bad_fraction() {
        let (g, b) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(additive_noise_samples(&g, &b, 1.0, NoiseMode::Training, &mut rng).is_err());
        assert!(additive_noise_samples(&g, &b, -0.1, NoiseMode::Training, &mut rng).is_err());
    }
}
