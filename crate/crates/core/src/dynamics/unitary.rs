use num_complex::Complex64;

use super::control::{PiecewiseConstantControl, UncertaintyTuple};
use super::integrator::{TAYLOR_MAX_NORM, TAYLOR_MAX_TERMS};
use super::lindblad::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum_state::{hermitian_eigen, ComplexMatrix, DensityOperator};

/// Unitarity tolerance on ‖UU† − I‖_max for computed propagators.
pub const UNITARITY_TOL: f64 = 1e-10;

/// U = exp(−i H t) for Hermitian H, through the spectral decomposition.
pub fn unitary_exp(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let n = h.rows();
    let mut scaled = vecs.clone();
    for (col, lambda) in vals.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * t);
        for row in 0..n {
            scaled[(row, col)] *= phase;
        }
    }
    scaled.matmul(&vecs.adjoint())
}

/// Closed-system propagation ρ ← U ρ U† with U = exp(−iH dt) per control step.
pub fn propagate_unitary(
    model: &LindbladModel,
    control: &PiecewiseConstantControl,
    theta: &UncertaintyTuple,
    rho0: &DensityOperator,
) -> Result<DensityOperator> {
    if !model.dissipators().is_empty() {
        return Err(Error::config("unitary propagation requires a closed system"));
    }
    if control.channels() != model.controls().len() || theta.channels() != model.controls().len() {
        return Err(Error::dim(format!(
            "model has {} control channels; control has {}, uncertainty tuple has {}",
            model.controls().len(),
            control.channels(),
            theta.channels()
        )));
    }
    if rho0.dim() != model.dim() {
        return Err(Error::dim(format!(
            "{}-level state for a {}-level model",
            rho0.dim(),
            model.dim()
        )));
    }
    let mut amps = vec![0.0; control.channels()];
    let mut rho = rho0.matrix().clone();
    let identity = ComplexMatrix::identity(model.dim());
    for step in 0..control.steps() {
        control.at_step(step, &mut amps);
        let u = unitary_exp(&model.hamiltonian(theta, &amps), control.dt());
        let defect = (&u.matmul(&u.adjoint()) - &identity).max_abs();
        if defect > UNITARITY_TOL {
            return Err(Error::Invariant(format!(
                "step {step} propagator is not unitary (defect {defect:.3e})"
            )));
        }
        rho = u.matmul(&rho).matmul(&u.adjoint());
    }
    Ok(DensityOperator::from_matrix_unchecked(rho))
}

/// Free evolution under a time-independent Hamiltonian.
pub fn evolve_free(h: &ComplexMatrix, rho: &DensityOperator, t: f64) -> DensityOperator {
    let u = unitary_exp(h, t);
    DensityOperator::from_matrix_unchecked(u.matmul(rho.matrix()).matmul(&u.adjoint()))
}

/// Real symmetric Hamiltonian family θ_0 H_0 + Σ θ_j u_j H_j acting on pure
/// states. Much cheaper than density-matrix propagation; used on hot fitness
/// paths where every Hamiltonian term is real.
#[derive(Clone, Debug)]
pub struct RealStateVectorModel {
    n: usize,
    drift: Vec<f64>,
    controls: Vec<Vec<f64>>,
}

/// Scratch buffers for [`RealStateVectorModel::propagate_into`].
#[derive(Default)]
pub struct StateVectorWorkspace {
    h: Vec<f64>,
    amps: Vec<f64>,
    term_re: Vec<f64>,
    term_im: Vec<f64>,
    tmp_re: Vec<f64>,
    tmp_im: Vec<f64>,
}

impl RealStateVectorModel {
    /// Builds the real family from a closed model; fails if any Hamiltonian
    /// term has an imaginary entry or is not symmetric.
    pub fn from_model(model: &LindbladModel) -> Result<Self> {
        if !model.dissipators().is_empty() {
            return Err(Error::config("state-vector propagation requires a closed system"));
        }
        let to_real = |m: &ComplexMatrix| -> Result<Vec<f64>> {
            if m.data().iter().any(|z| z.im != 0.0) {
                return Err(Error::config("Hamiltonian term has imaginary entries"));
            }
            Ok(m.data().iter().map(|z| z.re).collect())
        };
        Ok(Self {
            n: model.dim(),
            drift: to_real(model.drift())?,
            controls: model.controls().iter().map(to_real).collect::<Result<_>>()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Propagates ψ (split into real and imaginary parts) in place.
    pub fn propagate_into(
        &self,
        control: &PiecewiseConstantControl,
        theta: &UncertaintyTuple,
        psi_re: &mut [f64],
        psi_im: &mut [f64],
        ws: &mut StateVectorWorkspace,
    ) {
        let n = self.n;
        ws.h.resize(n * n, 0.0);
        ws.amps.resize(control.channels(), 0.0);
        for v in [&mut ws.term_re, &mut ws.term_im, &mut ws.tmp_re, &mut ws.tmp_im] {
            v.resize(n, 0.0);
        }
        let dt = control.dt();
        for step in 0..control.steps() {
            control.at_step(step, &mut ws.amps);
            let t0 = theta.drift();
            for (h, d) in ws.h.iter_mut().zip(&self.drift) {
                *h = t0 * d;
            }
            for (j, (hj, u)) in self.controls.iter().zip(&ws.amps).enumerate() {
                let c = theta.control(j) * u;
                if c != 0.0 {
                    for (h, x) in ws.h.iter_mut().zip(hj) {
                        *h += c * x;
                    }
                }
            }
            let norm = (0..n)
                .map(|i| ws.h[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            let pieces = (dt * norm / TAYLOR_MAX_NORM).ceil().max(1.0) as usize;
            let h = dt / pieces as f64;
            let StateVectorWorkspace {
                h: hm,
                term_re,
                term_im,
                tmp_re,
                tmp_im,
                ..
            } = &mut *ws;
            for _ in 0..pieces {
                if n == 8 {
                    taylor_schrodinger_fixed::<8>(hm, h, psi_re, psi_im);
                } else {
                    taylor_schrodinger(hm, n, h, psi_re, psi_im, (term_re, term_im, tmp_re, tmp_im));
                }
            }
        }
    }

    /// Convenience wrapper returning ψ(T).
    pub fn propagate(
        &self,
        control: &PiecewiseConstantControl,
        theta: &UncertaintyTuple,
        psi0: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        if psi0.len() != self.n {
            return Err(Error::dim(format!("{}-vector for a {}-level model", psi0.len(), self.n)));
        }
        if control.channels() != self.controls.len() || theta.channels() != self.controls.len() {
            return Err(Error::dim("control channel count mismatch"));
        }
        let mut re: Vec<f64> = psi0.iter().map(|z| z.re).collect();
        let mut im: Vec<f64> = psi0.iter().map(|z| z.im).collect();
        let mut ws = StateVectorWorkspace::default();
        self.propagate_into(control, theta, &mut re, &mut im, &mut ws);
        Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
    }
}

type Terms<'a> = (&'a mut [f64], &'a mut [f64], &'a mut [f64], &'a mut [f64]);

/// ψ ← exp(−i h H) ψ for real symmetric H, by Taylor series on the action.
fn taylor_schrodinger(hm: &[f64], n: usize, h: f64, re: &mut [f64], im: &mut [f64], terms: Terms<'_>) {
    let (tr, ti, sr, si) = terms;
    tr.copy_from_slice(re);
    ti.copy_from_slice(im);
    for k in 1..=TAYLOR_MAX_TERMS {
        // s = H t
        for i in 0..n {
            let row = &hm[i * n..(i + 1) * n];
            let mut ar = 0.0;
            let mut ai = 0.0;
            for ((a, x), y) in row.iter().zip(tr.iter()).zip(ti.iter()) {
                ar += a * x;
                ai += a * y;
            }
            sr[i] = ar;
            si[i] = ai;
        }
        // t = (−i h / k) s
        let c = h / k as f64;
        let mut tn = 0.0f64;
        let mut yn = 0.0f64;
        for i in 0..n {
            tr[i] = c * si[i];
            ti[i] = -c * sr[i];
            re[i] += tr[i];
            im[i] += ti[i];
            tn = tn.max(tr[i].abs()).max(ti[i].abs());
            yn = yn.max(re[i].abs()).max(im[i].abs());
        }
        if tn == 0.0 || tn <= f64::EPSILON * 0.25 * yn {
            break;
        }
    }
}

/// [`taylor_schrodinger`] on stack arrays, for three-qubit systems.
fn taylor_schrodinger_fixed<const N: usize>(hm: &[f64], h: f64, re: &mut [f64], im: &mut [f64]) {
    let hm = &hm[..N * N];
    let re: &mut [f64; N] = re.try_into().expect("state size");
    let im: &mut [f64; N] = im.try_into().expect("state size");
    let mut tr = *re;
    let mut ti = *im;
    for k in 1..=TAYLOR_MAX_TERMS {
        let c = h / k as f64;
        let mut nr = [0.0; N];
        let mut ni = [0.0; N];
        for i in 0..N {
            let row = &hm[i * N..(i + 1) * N];
            let mut ar = 0.0;
            let mut ai = 0.0;
            for j in 0..N {
                ar += row[j] * tr[j];
                ai += row[j] * ti[j];
            }
            // (−i c) (ar + i ai)
            nr[i] = c * ai;
            ni[i] = -c * ar;
        }
        let mut tn = 0.0f64;
        let mut yn = 0.0f64;
        for i in 0..N {
            re[i] += nr[i];
            im[i] += ni[i];
            tn = tn.max(nr[i].abs()).max(ni[i].abs());
            yn = yn.max(re[i].abs()).max(im[i].abs());
        }
        tr = nr;
        ti = ni;
        if tn == 0.0 || tn <= f64::EPSILON * 0.25 * yn {
            break;
        }
    }
}
