use super::control::{PiecewiseConstantControl, UncertaintyTuple};
use super::integrator::{Integrator, TAYLOR_MAX_NORM, TAYLOR_MAX_TERMS};
use super::lindblad::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum_state::{to_coherent_matrix, CoherentVector, ComplexMatrix, GeneratorBasis, I};

/// Dense row-major real square matrix, the coefficient type of the
/// coherent-vector flow.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "square matrix expected");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// max |A + Aᵀ|
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Affine coherent-vector flow
/// ẏ = (θ_0 A_H + A_D + Σ_j θ_j u_j B_j) y + l0.
#[derive(Clone, Debug)]
pub struct AffineBlochSystem {
    /// Coherent part generated by the drift Hamiltonian.
    pub hamiltonian_drift: RealMatrix,
    /// Dissipative part (does not scale with θ_0).
    pub dissipative_drift: RealMatrix,
    pub offset: Vec<f64>,
    pub controls: Vec<RealMatrix>,
    level: usize,
}

impl AffineBlochSystem {
    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// Number of levels n of the underlying system.
    pub fn level(&self) -> usize {
        self.level
    }

    /// Full drift θ_0 A_H + A_D.
    pub fn drift(&self, theta0: f64) -> RealMatrix {
        let mut a = self.dissipative_drift.clone();
        for (d, h) in a.data.iter_mut().zip(&self.hamiltonian_drift.data) {
            *d += theta0 * h;
        }
        a
    }

    /// Right-hand side ẏ for given multipliers and control amplitudes.
    pub fn rhs(&self, y: &[f64], theta: &UncertaintyTuple, amplitudes: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim() * self.dim()];
        self.assemble(theta, amplitudes, &mut g);
        let mut out = self.offset.clone();
        matvec_add(&g, y, &mut out);
        out
    }

    fn assemble(&self, theta: &UncertaintyTuple, amplitudes: &[f64], g: &mut [f64]) {
        let t0 = theta.drift();
        for ((gi, h), d) in g
            .iter_mut()
            .zip(&self.hamiltonian_drift.data)
            .zip(&self.dissipative_drift.data)
        {
            *gi = t0 * h + d;
        }
        for (j, (b, u)) in self.controls.iter().zip(amplitudes).enumerate() {
            let c = theta.control(j) * u;
            if c != 0.0 {
                for (gi, bi) in g.iter_mut().zip(&b.data) {
                    *gi += c * bi;
                }
            }
        }
    }
}

/// Derives the coherent-vector flow of a Lindblad model numerically: every
/// column is the image of one basis element under the master equation.
pub fn build_bloch_system(model: &LindbladModel, basis: &GeneratorBasis) -> Result<AffineBlochSystem> {
    let n = model.dim();
    if basis.dim() != n {
        return Err(Error::dim(format!(
            "{}-level basis for a {n}-level model",
            basis.dim()
        )));
    }
    let m = basis.len();
    let column_map = |f: &dyn Fn(&ComplexMatrix) -> ComplexMatrix| -> Result<RealMatrix> {
        let mut out = RealMatrix::zeros(m);
        for (l, u) in basis.generators().iter().enumerate() {
            let image = f(&u.scale_real(0.5));
            let col = to_coherent_matrix(&image, basis)?;
            for (row, v) in col.components().iter().enumerate() {
                out.data[row * m + l] = *v;
            }
        }
        Ok(out)
    };
    let commutator_map = |h: &ComplexMatrix| {
        let h = h.clone();
        move |x: &ComplexMatrix| ComplexMatrix::commutator(&h, x).scale(-I)
    };

    let hamiltonian_drift = column_map(&commutator_map(model.drift()))?;
    let dissipative_drift = column_map(&|x| model.dissipate(x))?;
    let controls = model
        .controls()
        .iter()
        .map(|h| column_map(&commutator_map(h)))
        .collect::<Result<Vec<_>>>()?;
    let identity_image = model.dissipate(&ComplexMatrix::identity(n).scale_real(1.0 / n as f64));
    let offset = to_coherent_matrix(&identity_image, basis)?.into_components();

    Ok(AffineBlochSystem {
        hamiltonian_drift,
        dissipative_drift,
        offset,
        controls,
        level: n,
    })
}

#[inline]
fn matvec_add(g: &[f64], y: &[f64], out: &mut [f64]) {
    let m = y.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &g[i * m..(i + 1) * m];
        let mut acc = 0.0;
        for (a, b) in row.iter().zip(y) {
            acc += a * b;
        }
        *o += acc;
    }
}

#[inline]
fn matvec(g: &[f64], y: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    matvec_add(g, y, out);
}

fn inf_norm(g: &[f64], m: usize) -> f64 {
    (0..m)
        .map(|i| g[i * m..(i + 1) * m].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Scratch buffers for [`propagate_bloch_into`], reusable across calls.
#[derive(Default)]
pub struct BlochWorkspace {
    g: Vec<f64>,
    amps: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl BlochWorkspace {
    fn prepare(&mut self, m: usize, channels: usize) {
        self.g.resize(m * m, 0.0);
        self.amps.resize(channels, 0.0);
        for k in &mut self.k {
            k.resize(m, 0.0);
        }
        self.tmp.resize(m, 0.0);
    }
}

/// Propagates the coherent vector y0 through every control step.
pub fn propagate_bloch(
    sys: &AffineBlochSystem,
    control: &PiecewiseConstantControl,
    theta: &UncertaintyTuple,
    y0: &CoherentVector,
    integrator: Integrator,
) -> Result<CoherentVector> {
    if y0.components().len() != sys.dim() {
        return Err(Error::dim(format!(
            "{}-component vector for a {}-dimensional flow",
            y0.components().len(),
            sys.dim()
        )));
    }
    if control.channels() != sys.controls.len() || theta.channels() != sys.controls.len() {
        return Err(Error::dim(format!(
            "flow has {} control channels; control has {}, uncertainty tuple has {}",
            sys.controls.len(),
            control.channels(),
            theta.channels()
        )));
    }
    integrator.validate()?;
    let mut y = y0.components().to_vec();
    let mut ws = BlochWorkspace::default();
    propagate_bloch_into(sys, control, theta, &mut y, integrator, &mut ws);
    CoherentVector::new(sys.level, y)
}

/// Allocation-free propagation kernel; `y` holds y0 on entry and y(T) on exit.
/// Dimensions are the caller's responsibility.
pub fn propagate_bloch_into(
    sys: &AffineBlochSystem,
    control: &PiecewiseConstantControl,
    theta: &UncertaintyTuple,
    y: &mut [f64],
    integrator: Integrator,
    ws: &mut BlochWorkspace,
) {
    let m = sys.dim();
    ws.prepare(m, control.channels());
    let dt = control.dt();
    for step in 0..control.steps() {
        control.at_step(step, &mut ws.amps);
        sys.assemble(theta, &ws.amps, &mut ws.g);
        match integrator {
            Integrator::Exponential => {
                let pieces = (dt * inf_norm(&ws.g, m) / TAYLOR_MAX_NORM).ceil().max(1.0) as usize;
                let h = dt / pieces as f64;
                for _ in 0..pieces {
                    if m == 3 {
                        taylor_affine_fixed::<3>(&ws.g, &sys.offset, y, h);
                    } else {
                        taylor_affine(&ws.g, &sys.offset, y, h, &mut ws.k[0], &mut ws.tmp);
                    }
                }
            }
            Integrator::Rk4 { substeps } => {
                let h = dt / substeps as f64;
                for _ in 0..substeps {
                    rk4_affine(&ws.g, &sys.offset, y, h, &mut ws.k, &mut ws.tmp);
                }
            }
        }
    }
}

/// y ← exp(hG) y + h φ₁(hG) l0, summed as the Taylor series of the augmented
/// generator [[G, l0], [0, 0]].
fn taylor_affine(g: &[f64], l0: &[f64], y: &mut [f64], h: f64, term: &mut [f64], tmp: &mut [f64]) {
    term.copy_from_slice(l0);
    matvec_add(g, y, term);
    term.iter_mut().for_each(|t| *t *= h);
    for (yi, ti) in y.iter_mut().zip(term.iter()) {
        *yi += ti;
    }
    for k in 2..=TAYLOR_MAX_TERMS {
        matvec(g, term, tmp);
        let c = h / k as f64;
        let mut tn = 0.0f64;
        let mut yn = 0.0f64;
        for ((ti, si), yi) in term.iter_mut().zip(tmp.iter()).zip(y.iter_mut()) {
            *ti = c * si;
            *yi += *ti;
            tn = tn.max(ti.abs());
            yn = yn.max(yi.abs());
        }
        if tn == 0.0 || tn <= f64::EPSILON * 0.25 * yn {
            break;
        }
    }
}

/// [`taylor_affine`] on stack arrays, for the common two-level case.
fn taylor_affine_fixed<const M: usize>(g: &[f64], l0: &[f64], y: &mut [f64], h: f64) {
    let g = &g[..M * M];
    let y: &mut [f64; M] = y.try_into().expect("state size");
    let mut term = [0.0; M];
    for i in 0..M {
        let mut acc = l0[i];
        for j in 0..M {
            acc += g[i * M + j] * y[j];
        }
        term[i] = h * acc;
    }
    for i in 0..M {
        y[i] += term[i];
    }
    for k in 2..=TAYLOR_MAX_TERMS {
        let c = h / k as f64;
        let mut next = [0.0; M];
        let mut tn = 0.0f64;
        let mut yn = 0.0f64;
        for i in 0..M {
            let mut acc = 0.0;
            for j in 0..M {
                acc += g[i * M + j] * term[j];
            }
            next[i] = c * acc;
            y[i] += next[i];
            tn = tn.max(next[i].abs());
            yn = yn.max(y[i].abs());
        }
        term = next;
        if tn == 0.0 || tn <= f64::EPSILON * 0.25 * yn {
            break;
        }
    }
}

fn rk4_affine(g: &[f64], l0: &[f64], y: &mut [f64], h: f64, k: &mut [Vec<f64>; 4], tmp: &mut [f64]) {
    let eval = |x: &[f64], out: &mut [f64]| {
        out.copy_from_slice(l0);
        matvec_add(g, x, out);
    };
    let [k1, k2, k3, k4] = k;
    eval(y, k1);
    for ((t, yi), ki) in tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
        *t = yi + 0.5 * h * ki;
    }
    eval(tmp, k2);
    for ((t, yi), ki) in tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
        *t = yi + 0.5 * h * ki;
    }
    eval(tmp, k3);
    for ((t, yi), ki) in tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
        *t = yi + h * ki;
    }
    eval(tmp, k4);
    for i in 0..y.len() {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{lindblad::Dissipator, Bounds};
    use crate::quantum_state::{generator_basis, pauli, Axis};

    #[test]
    fn closed_flow_is_antisymmetric() {
        let model = LindbladModel::closed(pauli(Axis::Z).scale_real(0.3), vec![pauli(Axis::Y)]).unwrap();
        let sys = build_bloch_system(&model, &generator_basis(2).unwrap()).unwrap();
        assert!(sys.offset.iter().all(|x| x.abs() < 1e-15));
        assert!(sys.drift(1.0).antisymmetry_residual() < 1e-10);
        assert!(sys.controls[0].antisymmetry_residual() < 1e-10);
    }

    #[test]
    fn qutrit_flow_builds() {
        let n = 3;
        let mut h0 = ComplexMatrix::zeros(n, n);
        h0[(1, 1)] = num_complex::Complex64::new(1.0, 0.0);
        h0[(2, 2)] = num_complex::Complex64::new(2.5, 0.0);
        let lower = Dissipator::new(0.1, ComplexMatrix::unit(3, 0, 1)).unwrap();
        let model = LindbladModel::new(h0, vec![], vec![lower]).unwrap();
        let sys = build_bloch_system(&model, &generator_basis(3).unwrap()).unwrap();
        assert_eq!(sys.dim(), 8);
        assert!(sys.hamiltonian_drift.antisymmetry_residual() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_vector() {
        let model = LindbladModel::closed(pauli(Axis::Z), vec![pauli(Axis::X)]).unwrap();
        let sys = build_bloch_system(&model, &generator_basis(2).unwrap()).unwrap();
        let control = PiecewiseConstantControl::zeros(1, 2, 0.1, vec![Bounds::new(-1., 1.).unwrap()]).unwrap();
        let y0 = CoherentVector::zeros(3);
        let r = propagate_bloch(&sys, &control, &UncertaintyTuple::nominal(1), &y0, Integrator::Exponential);
        assert!(r.is_err());
        assert!(build_bloch_system(&model, &generator_basis(3).unwrap()).is_err());
    }
}
