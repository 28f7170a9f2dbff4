use crate::error::{Error, Result};

/// Finite set of uncertainty tuples Θ_k over which fitness is averaged.
///
/// Each uncertain parameter takes `points` equally spaced values in
/// [1 − E, 1 + E] (endpoints included; a single point means nominal only) and
/// the grid is their Cartesian product, enumerated lexicographically with the
/// first parameter most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintySampleGrid {
    bound: f64,
    points: usize,
    values: Vec<f64>,
    tuples: Vec<Vec<f64>>,
}

impl UncertaintySampleGrid {
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Per-parameter sample values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tuples(&self) -> &[Vec<f64>] {
        &self.tuples
    }

    /// N, the number of tuples.
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Nominal-only grid for `n_params` parameters.
    pub fn nominal(n_params: usize) -> Self {
        make_grid(0.0, 1, n_params).expect("valid")
    }
}

pub fn make_grid(e: f64, points: usize, n_params: usize) -> Result<UncertaintySampleGrid> {
    if points == 0 {
        return Err(Error::config("grid needs at least one point per parameter"));
    }
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::config(format!("uncertainty bound E must lie in [0, 1], got {e}")));
    }
    let values: Vec<f64> = if points == 1 {
        vec![1.0]
    } else {
        (0..points)
            .map(|k| 1.0 + e * (2.0 * k as f64 / (points - 1) as f64 - 1.0))
            .collect()
    };
    let count = points
        .checked_pow(n_params as u32)
        .ok_or_else(|| Error::config("uncertainty grid too large"))?;
    let tuples = (0..count)
        .map(|mut idx| {
            let mut t = vec![0.0; n_params];
            for slot in t.iter_mut().rev() {
                *slot = values[idx % points];
                idx /= points;
            }
            t
        })
        .collect();
    Ok(UncertaintySampleGrid {
        bound: e,
        points,
        values,
        tuples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_by_three() {
        let g = make_grid(0.2, 3, 2).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.values(), &[0.8, 1.0, 1.2]);
        assert_eq!(g.tuples()[0], vec![0.8, 0.8]);
        assert_eq!(g.tuples()[1], vec![0.8, 1.0]);
        assert_eq!(g.tuples()[4], vec![1.0, 1.0]);
        assert_eq!(g.tuples()[8], vec![1.2, 1.2]);
    }

    #[test]
    fn zero_bound_is_all_nominal() {
        let g = make_grid(0.0, 4, 2).unwrap();
        assert_eq!(g.len(), 16);
        assert!(g.tuples().iter().flatten().all(|&t| t == 1.0));
    }

    #[test]
    fn single_point_is_nominal() {
        let g = make_grid(0.2, 1, 2).unwrap();
        assert_eq!(g.tuples(), &[vec![1.0, 1.0]]);
        assert_eq!(UncertaintySampleGrid::nominal(0).tuples(), &[Vec::<f64>::new()]);
    }

    #[test]
    fn general_spacing_in_bounds() {
        let g = make_grid(0.1, 5, 1).unwrap();
        assert_eq!(g.values().first(), Some(&0.9));
        assert_eq!(g.values().last(), Some(&1.1));
        assert!(g.values().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_grid(0.2, 0, 2).is_err());
        assert!(make_grid(1.5, 3, 2).is_err());
        assert!(make_grid(-0.1, 3, 2).is_err());
    }
}
