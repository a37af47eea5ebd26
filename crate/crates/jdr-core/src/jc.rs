//! Microwave-mode-to-qubit transduction: resonant Jaynes-Cummings exchange
//! of a displaced-thermal field with a ground-state qubit, and selection of
//! the interaction time that maximizes distinguishability of the BPSK pair.

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix};
use crate::physmodel::TransductionChannel;
use crate::{C64, CMatrix};

/// Configuration of the qubit-mode interaction and the optimal-time search.
#[derive(Debug, Clone, PartialEq)]
pub struct JcConfig {
    /// Qubit-mode coupling (rad/s).
    pub chi: f64,
    /// Search window as a multiple of 1/chi.
    pub time_window: f64,
    /// Grid points for the coarse search.
    pub grid_points: usize,
    /// Golden-section refinement around the best grid point.
    pub refine: bool,
    /// Leakage tolerance for the Fock truncation of the field states.
    pub leakage_tol: f64,
}

impl JcConfig {
    /// Discrimination default: window 5/chi. The coarse grid brackets the
    /// optimum; golden-section refinement then resolves it, so the grid only
    /// needs to separate distinct local maxima of the objective.
    pub fn discrimination(chi: f64) -> Self {
        Self {
            chi,
            time_window: 5.0,
            grid_points: 41,
            refine: true,
            leakage_tol: 1e-8,
        }
    }

    /// Capacity default: window 10/chi to capture the true optimum, at the
    /// same grid resolution.
    pub fn capacity(chi: f64) -> Self {
        Self {
            time_window: 10.0,
            grid_points: 81,
            ..Self::discrimination(chi)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0) || !(self.time_window > 0.0) {
            return Err(Error::Parameter(format!(
                "JcConfig requires chi > 0 and time_window > 0, got ({}, {})",
                self.chi, self.time_window
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::Parameter("grid_points must be >= 2".into()));
        }
        Ok(())
    }
}

/// The two transduced qubit states of a BPSK pair at the common optimal
/// interaction time.
#[derive(Debug, Clone, PartialEq)]
pub struct TransducedPair {
    pub rho_plus: DensityMatrix,
    pub rho_minus: DensityMatrix,
    /// Maximizing interaction time (s).
    pub t_star: f64,
    /// Trace distance at t_star.
    pub tau: f64,
}

/// Evolve `field` (x) |g><g| under chi (b sigma+ + b^dag sigma-) for time `t`
/// and trace out the field.
///
/// The interaction is block diagonal in total excitation number, so the qubit
/// reduced state follows from the field populations and the first
/// off-diagonal of the field matrix; the evolution is exact within the
/// truncation. Qubit basis is (|g>, |e>) = (|0>, |1>).
pub fn jc_evolve(field: &DensityMatrix, t: f64, chi: f64) -> Result<DensityMatrix> {
    if !(chi > 0.0) || !t.is_finite() || t < 0.0 {
        return Err(Error::Parameter(format!(
            "jc_evolve requires chi > 0 and t >= 0, got ({chi}, {t})"
        )));
    }
    let d = field.dim();
    let leak = fock::tail_mass(field, 2);
    if leak > 1e-6 {
        return Err(Error::Truncation(format!(
            "field leakage {leak:.3e} too large for faithful evolution"
        )));
    }
    let angle = |n: usize| chi * t * (n as f64).sqrt();
    let mut p_e = 0.0;
    for n in 0..d {
        p_e += field.data()[(n, n)].re * angle(n).sin().powi(2);
    }
    let mut coherence = C64::new(0.0, 0.0);
    for k in 0..d.saturating_sub(1) {
        coherence += field.data()[(k + 1, k)] * angle(k + 1).sin() * angle(k).cos();
    }
    // <e| rho_q |g> = -i sum_k sin(theta_{k+1}) cos(theta_k) rho_f[k+1, k].
    let eg = -C64::i() * coherence;
    let mut rho = CMatrix::zeros(2, 2);
    rho[(0, 0)] = C64::new(1.0 - p_e, 0.0);
    rho[(1, 1)] = C64::new(p_e, 0.0);
    rho[(1, 0)] = eg;
    rho[(0, 1)] = eg.conj();
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// Joint unitary evolution of field (x) qubit for time `t`; index 2n + s with
/// s = 0 for |g>, 1 for |e>. Used to cross-check [`jc_evolve`] and the
/// excitation constant of motion.
pub fn jc_joint_unitary(dim: usize, t: f64, chi: f64) -> CMatrix {
    let mut u = CMatrix::identity(2 * dim, 2 * dim);
    for n in 1..dim {
        let theta = chi * t * (n as f64).sqrt();
        let (s, c) = theta.sin_cos();
        let g_idx = 2 * n; // |n, g>
        let e_idx = 2 * (n - 1) + 1; // |n-1, e>
        u[(g_idx, g_idx)] = C64::new(c, 0.0);
        u[(e_idx, e_idx)] = C64::new(c, 0.0);
        u[(g_idx, e_idx)] = C64::new(0.0, -s);
        u[(e_idx, g_idx)] = C64::new(0.0, -s);
    }
    // |dim-1, e> has no partner within the truncation and is left untouched;
    // valid because the initial qubit state is |g>.
    u
}

/// Total excitation operator N = b^dag b + sigma+ sigma- on the joint space.
pub fn excitation_operator(dim: usize) -> CMatrix {
    let mut n_op = CMatrix::zeros(2 * dim, 2 * dim);
    for n in 0..dim {
        for s in 0..2 {
            n_op[(2 * n + s, 2 * n + s)] = C64::new((n + s) as f64, 0.0);
        }
    }
    n_op
}

/// field (x) |g><g| on the joint space.
pub fn joint_ground_state(field: &DensityMatrix) -> DensityMatrix {
    let d = field.dim();
    let mut rho = CMatrix::zeros(2 * d, 2 * d);
    for m in 0..d {
        for n in 0..d {
            rho[(2 * m, 2 * n)] = field.data()[(m, n)];
        }
    }
    DensityMatrix::from_matrix_unchecked(rho)
}

/// Partial trace of a joint field-qubit state down to the qubit.
pub fn qubit_from_joint(joint: &DensityMatrix) -> DensityMatrix {
    let d = joint.dim() / 2;
    let mut rho = CMatrix::zeros(2, 2);
    for s in 0..2 {
        for s2 in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..d {
                acc += joint.data()[(2 * n + s, 2 * n + s2)];
            }
            rho[(s, s2)] = acc;
        }
    }
    DensityMatrix::from_matrix_unchecked(rho)
}

fn bpsk_pair_at(
    plus: &DensityMatrix,
    minus: &DensityMatrix,
    t: f64,
    chi: f64,
) -> Result<(DensityMatrix, DensityMatrix, f64)> {
    let rho_plus = jc_evolve(plus, t, chi)?;
    let rho_minus = jc_evolve(minus, t, chi)?;
    let tau = fock::trace_distance(&rho_plus, &rho_minus)?;
    Ok((rho_plus, rho_minus, tau))
}

/// Maximize `objective(t)` over the interaction-time window of `cfg`:
/// coarse grid search, then golden-section refinement in the bracket around
/// the best grid point. Returns (t_star, objective at t_star).
pub fn optimize_interaction_time<F>(cfg: &JcConfig, objective: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    cfg.validate()?;
    let t_max = cfg.time_window / cfg.chi;
    let step = t_max / (cfg.grid_points - 1) as f64;
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..cfg.grid_points {
        let val = objective(i as f64 * step)?;
        if val > best_val {
            best_val = val;
            best_idx = i;
        }
    }
    let mut t_star = best_idx as f64 * step;

    if cfg.refine && best_val > 0.0 {
        let mut a = (best_idx.saturating_sub(1)) as f64 * step;
        let mut b = ((best_idx + 1).min(cfg.grid_points - 1)) as f64 * step;
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = objective(x1)?;
        let mut f2 = objective(x2)?;
        for _ in 0..80 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = objective(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = objective(x1)?;
            }
            if b - a < 1e-12 * t_max {
                break;
            }
        }
        let t_refined = 0.5 * (a + b);
        let refined_val = objective(t_refined)?;
        if refined_val >= best_val {
            t_star = t_refined;
            best_val = refined_val;
        }
    }
    Ok((t_star, best_val))
}

/// Transduce the BPSK pair +-beta through `channel` and pick the interaction
/// time in [0, window/chi] that maximizes the qubit trace distance.
pub fn transduce_bpsk(
    beta: C64,
    channel: &TransductionChannel,
    cfg: &JcConfig,
) -> Result<TransducedPair> {
    cfg.validate()?;
    if !(channel.eta_tr > 0.0 && channel.eta_tr <= 1.0) || !(channel.nbar_tr >= 0.0) {
        return Err(Error::Parameter(format!(
            "invalid channel: eta_tr = {}, nbar_tr = {}",
            channel.eta_tr, channel.nbar_tr
        )));
    }
    let alpha0 = beta * C64::new(channel.eta_tr.sqrt(), 0.0);
    let (plus, _) = fock::displaced_thermal_auto(channel.nbar_tr, alpha0, cfg.leakage_tol)?;
    let (minus, _) = fock::displaced_thermal_auto(channel.nbar_tr, -alpha0, cfg.leakage_tol)?;

    let tau_at = |t: f64| -> Result<f64> { Ok(bpsk_pair_at(&plus, &minus, t, cfg.chi)?.2) };
    let (t_star, _) = optimize_interaction_time(cfg, tau_at)?;

    let (rho_plus, rho_minus, tau) = bpsk_pair_at(&plus, &minus, t_star, cfg.chi)?;
    Ok(TransducedPair {
        rho_plus,
        rho_minus,
        t_star,
        tau,
    })
}

/// Reference fit for the optimal interaction time.
///
/// `mpn_coherent` is the coherent part eta_tr |beta|^2 of the microwave mean
/// photon number. Below MPN = 1/6 the optimum is pi/(2 chi); above 1/4 it
/// follows pi / (4 chi sqrt(eta |beta|^2 + 1.5 nbar_tr)); the crossover is
/// bridged by linear interpolation.
pub fn optimal_time_reference(mpn_coherent: f64, nbar_tr: f64, chi: f64) -> Result<f64> {
    if mpn_coherent < 0.0 || nbar_tr < 0.0 || !(chi > 0.0) {
        return Err(Error::Parameter(format!(
            "optimal_time_reference requires non-negative photon numbers and chi > 0, got ({mpn_coherent}, {nbar_tr}, {chi})"
        )));
    }
    let mpn = mpn_coherent + nbar_tr;
    let low = std::f64::consts::PI / (2.0 * chi);
    if mpn <= 1.0 / 6.0 {
        return Ok(low);
    }
    let high = std::f64::consts::PI / (4.0 * chi * (mpn_coherent + 1.5 * nbar_tr).sqrt());
    if mpn >= 0.25 {
        return Ok(high);
    }
    let weight = (mpn - 1.0 / 6.0) / (0.25 - 1.0 / 6.0);
    Ok((1.0 - weight) * low + weight * high)
}
