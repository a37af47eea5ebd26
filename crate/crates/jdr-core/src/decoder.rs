//! Codeword discrimination: codebooks, the average-success cost, its exact
//! gradient for the layered ansatz, and two optimizers — multi-restart
//! adaptive-moment ascent over circuit angles and Riemannian ascent over
//! unrestricted codeword-size unitaries.

use crate::error::{Error, Result};
use crate::exec;
use crate::fock::DensityMatrix;
use crate::qsim::{
    apply_cnot, apply_single_qubit_gate, measurement_distribution, run_circuit, ry, rz,
    CircuitLayout, CircuitOp, NoiseModel, RotationAxis,
};
use crate::{C64, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Assignment of n-pulse codewords to measurement outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    codewords: Vec<Vec<u8>>,
    output_map: Vec<usize>,
    measured_qubits: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    /// All even-weight strings; requires M = 2^{n-1}.
    Parity,
    /// M distinct uniform strings drawn from the seed.
    Random,
}

impl Codebook {
    /// Explicit codebook from codewords, outcome assignment, and the set of
    /// qubits read out.
    pub fn new(
        n: usize,
        codewords: Vec<Vec<u8>>,
        output_map: Vec<usize>,
        measured_qubits: Vec<usize>,
    ) -> Result<Self> {
        if n == 0 || n > crate::qsim::MAX_QUBITS {
            return Err(Error::Parameter(format!(
                "codeword length must be in 1..={}, got {n}",
                crate::qsim::MAX_QUBITS
            )));
        }
        let m = codewords.len();
        if m < 2 || m > (1 << n) {
            return Err(Error::Parameter(format!(
                "codeword count must be in 2..=2^{n}, got {m}"
            )));
        }
        for (i, w) in codewords.iter().enumerate() {
            if w.len() != n || w.iter().any(|&b| b > 1) {
                return Err(Error::Parameter(format!(
                    "codeword {i} is not an {n}-bit string"
                )));
            }
            if codewords[i + 1..].contains(w) {
                return Err(Error::Parameter(format!("duplicate codeword {i}")));
            }
        }
        if output_map.len() != m {
            return Err(Error::Parameter(format!(
                "output map must assign all {m} codewords, got {}",
                output_map.len()
            )));
        }
        let k = measured_qubits.len();
        if k == 0 || (1usize << k) < m {
            return Err(Error::Parameter(format!(
                "{k} measured qubits cannot distinguish {m} codewords"
            )));
        }
        let mut seen_q = 0usize;
        for &q in &measured_qubits {
            if q >= n || seen_q & (1 << q) != 0 {
                return Err(Error::Parameter(format!(
                    "measured qubit {q} invalid or repeated"
                )));
            }
            seen_q |= 1 << q;
        }
        for (i, &o) in output_map.iter().enumerate() {
            if o >= 1 << k {
                return Err(Error::Parameter(format!(
                    "outcome {o} out of range for {k} measured qubits"
                )));
            }
            if output_map[i + 1..].contains(&o) {
                return Err(Error::Parameter(format!("outcome {o} assigned twice")));
            }
        }
        Ok(Self {
            n,
            codewords,
            output_map,
            measured_qubits,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[Vec<u8>] {
        &self.codewords
    }

    /// Outcome index (on the measured qubits) assigned to codeword `i`.
    pub fn output_map(&self) -> &[usize] {
        &self.output_map
    }

    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured_qubits
    }
}

pub fn make_codebook(n: usize, m: usize, kind: CodebookKind, seed: u64) -> Result<Codebook> {
    if n == 0 || n > crate::qsim::MAX_QUBITS {
        return Err(Error::Parameter(format!(
            "codeword length must be in 1..={}, got {n}",
            crate::qsim::MAX_QUBITS
        )));
    }
    if m < 2 || m > (1 << n) {
        return Err(Error::Parameter(format!(
            "codeword count must be in 2..=2^{n}, got {m}"
        )));
    }
    let to_bits = |word: usize| -> Vec<u8> {
        (0..n).map(|b| ((word >> (n - 1 - b)) & 1) as u8).collect()
    };
    let codewords: Vec<Vec<u8>> = match kind {
        CodebookKind::Parity => {
            if n < 2 || m != 1 << (n - 1) {
                return Err(Error::Parameter(format!(
                    "parity codebook needs M = 2^(n-1), got n = {n}, M = {m}"
                )));
            }
            (0..1usize << n)
                .filter(|w| w.count_ones() % 2 == 0)
                .map(to_bits)
                .collect()
        }
        CodebookKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut words = Vec::with_capacity(m);
            while words.len() < m {
                let w = rng.gen_range(0..1usize << n);
                if !words.contains(&w) {
                    words.push(w);
                }
            }
            words.into_iter().map(to_bits).collect()
        }
    };
    let k = usize::max(1, m.next_power_of_two().trailing_zeros() as usize);
    Ok(Codebook {
        n,
        codewords,
        output_map: (0..m).collect(),
        measured_qubits: (0..k).collect(),
    })
}

/// Average probability of successful decoding after running the ansatz on
/// every codeword state.
pub fn cost_circuit(
    layout: &CircuitLayout,
    params: &[f64],
    states: &[DensityMatrix],
    book: &Codebook,
    noise: &NoiseModel,
) -> Result<f64> {
    check_instance(states, book)?;
    let mut total = 0.0;
    for (i, rho) in states.iter().enumerate() {
        let out = run_circuit(rho, layout, params, noise)?;
        let probs = measurement_distribution(&out, book.measured_qubits(), noise.pm)?;
        total += probs[book.output_map()[i]];
    }
    Ok(total / states.len() as f64)
}

/// Same cost for an unrestricted codeword-size unitary.
pub fn cost_unitary(
    u: &CMatrix,
    states: &[DensityMatrix],
    book: &Codebook,
    noise: &NoiseModel,
) -> Result<f64> {
    check_instance(states, book)?;
    let dim = 1usize << book.n();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::Dimension(format!(
            "unitary must be {dim}x{dim}, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    noise.validate()?;
    let mut total = 0.0;
    for (i, rho) in states.iter().enumerate() {
        let evolved = DensityMatrix::from_matrix_unchecked(u * rho.data() * u.adjoint());
        let probs = measurement_distribution(&evolved, book.measured_qubits(), noise.pm)?;
        total += probs[book.output_map()[i]];
    }
    Ok(total / states.len() as f64)
}

fn check_instance(states: &[DensityMatrix], book: &Codebook) -> Result<()> {
    if states.len() != book.m() {
        return Err(Error::Dimension(format!(
            "expected {} codeword states, got {}",
            book.m(),
            states.len()
        )));
    }
    let dim = 1usize << book.n();
    for rho in states {
        if rho.dim() != dim {
            return Err(Error::Dimension(format!(
                "codeword state has dim {}, expected {dim}",
                rho.dim()
            )));
        }
    }
    Ok(())
}

/// Projector onto outcome `outcome` of the measured qubits, identity on the
/// rest.
fn outcome_projector(book: &Codebook, outcome: usize) -> CMatrix {
    let n = book.n();
    let dim = 1usize << n;
    let k = book.measured_qubits().len();
    let mut proj = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut obs = 0usize;
        for (pos, &q) in book.measured_qubits().iter().enumerate() {
            if idx & (1 << (n - 1 - q)) != 0 {
                obs |= 1 << (k - 1 - pos);
            }
        }
        if obs == outcome {
            proj[(idx, idx)] = C64::new(1.0, 0.0);
        }
    }
    proj
}

/// Exact gradient of the noise-free circuit cost via reverse-mode
/// propagation: for each rotation exp(-i theta P / 2) the derivative is
/// Im Tr(O P sigma), with sigma the state just after the gate and O the
/// observable pulled back through the remaining gates.
pub fn cost_gradient(
    layout: &CircuitLayout,
    params: &[f64],
    states: &[DensityMatrix],
    book: &Codebook,
) -> Result<Vec<f64>> {
    check_instance(states, book)?;
    if params.len() != layout.param_count() {
        return Err(Error::Parameter(format!(
            "expected {} parameters, got {}",
            layout.param_count(),
            params.len()
        )));
    }
    let n = layout.qubits();
    let ops = layout.ops();
    let weight = 1.0 / states.len() as f64;

    let per_state = exec::map_indexed(states.to_vec(), |i, rho| {
        // Forward pass: state after every gate.
        let mut sigma = rho.data().clone();
        let mut after: Vec<CMatrix> = Vec::with_capacity(ops.len());
        for op in &ops {
            match *op {
                CircuitOp::Rotation {
                    qubit,
                    axis,
                    param_idx,
                } => {
                    let u = rotation_matrix(axis, params[param_idx]);
                    apply_single_qubit_gate(&mut sigma, n, qubit, &u);
                }
                CircuitOp::Cnot { control, target } => {
                    apply_cnot(&mut sigma, n, control, target);
                }
            }
            after.push(sigma.clone());
        }
        // Backward pass: pull the outcome projector through the gates.
        let mut obs = outcome_projector(book, book.output_map()[i]);
        let mut grad = vec![0.0f64; params.len()];
        for (k, op) in ops.iter().enumerate().rev() {
            match *op {
                CircuitOp::Rotation {
                    qubit,
                    axis,
                    param_idx,
                } => {
                    let a = &after[k] * &obs;
                    grad[param_idx] += weight * pauli_trace(&a, n, qubit, axis).im;
                    let u = rotation_matrix(axis, params[param_idx]);
                    apply_single_qubit_gate(&mut obs, n, qubit, &u.adjoint());
                }
                CircuitOp::Cnot { control, target } => {
                    apply_cnot(&mut obs, n, control, target);
                }
            }
        }
        grad
    });

    let mut grad = vec![0.0f64; params.len()];
    for partial in per_state {
        for (g, p) in grad.iter_mut().zip(partial) {
            *g += p;
        }
    }
    Ok(grad)
}

fn rotation_matrix(axis: RotationAxis, theta: f64) -> CMatrix {
    match axis {
        RotationAxis::Z => rz(theta),
        RotationAxis::Y => ry(theta),
    }
}

/// Tr(P_q A) for P the rotation generator on qubit q.
fn pauli_trace(a: &CMatrix, n: usize, qubit: usize, axis: RotationAxis) -> C64 {
    let dim = 1usize << n;
    let bit = 1usize << (n - 1 - qubit);
    let mut acc = C64::new(0.0, 0.0);
    match axis {
        RotationAxis::Z => {
            for idx in 0..dim {
                if idx & bit == 0 {
                    acc += a[(idx, idx)];
                } else {
                    acc -= a[(idx, idx)];
                }
            }
        }
        RotationAxis::Y => {
            let i = C64::new(0.0, 1.0);
            for idx in 0..dim {
                if idx & bit == 0 {
                    let idx1 = idx | bit;
                    // Y[0,1] = -i picks A[1,0]; Y[1,0] = i picks A[0,1].
                    acc += -i * a[(idx1, idx)] + i * a[(idx, idx1)];
                }
            }
        }
    }
    acc
}

/// Optimizer options shared by both training paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOpts {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainOpts {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 2000,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl TrainOpts {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Parameter(
                "restarts and max_iters must be positive".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }

    fn restart_seed(&self, restart: usize) -> u64 {
        self.seed
            .wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Trained decoder: either ansatz angles or a full unitary.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Angles(Vec<f64>),
    Unitary(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub solution: Solution,
    pub j: f64,
    pub error: f64,
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Multi-restart adaptive-moment gradient ascent over the circuit angles.
/// Training runs on the noise-free model; restarts are independent and run
/// in parallel.
pub fn train(
    states: &[DensityMatrix],
    book: &Codebook,
    layout: &CircuitLayout,
    opts: &TrainOpts,
) -> Result<TrainResult> {
    opts.validate()?;
    check_instance(states, book)?;
    if layout.qubits() != book.n() {
        return Err(Error::Dimension(format!(
            "layout has {} qubits but codebook has {}",
            layout.qubits(),
            book.n()
        )));
    }
    let noiseless = NoiseModel::noiseless();
    let runs: Vec<Result<(Vec<f64>, f64, usize, bool)>> =
        exec::map_indexed((0..opts.restarts).collect(), |_, r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.restart_seed(r));
            let mut params: Vec<f64> = (0..layout.param_count())
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            let mut m = vec![0.0f64; params.len()];
            let mut v = vec![0.0f64; params.len()];
            let lr = 0.1;
            let (b1, b2, eps) = (0.9, 0.999, 1e-8);
            let mut best_j = cost_circuit(layout, &params, states, book, &noiseless)?;
            let mut prev_j = best_j;
            let mut best = params.clone();
            let mut stall = 0usize;
            let mut iters = 0usize;
            let mut converged = false;
            for it in 1..=opts.max_iters {
                iters = it;
                let grad = cost_gradient(layout, &params, states, book)?;
                for ((p, g), (mi, vi)) in params
                    .iter_mut()
                    .zip(&grad)
                    .zip(m.iter_mut().zip(v.iter_mut()))
                {
                    *mi = b1 * *mi + (1.0 - b1) * g;
                    *vi = b2 * *vi + (1.0 - b2) * g * g;
                    let mh = *mi / (1.0 - b1.powi(it as i32));
                    let vh = *vi / (1.0 - b2.powi(it as i32));
                    *p += lr * mh / (vh.sqrt() + eps);
                }
                let j = cost_circuit(layout, &params, states, book, &noiseless)?;
                if j > best_j {
                    best_j = j;
                    best = params.clone();
                }
                if (j - prev_j).abs() < opts.tol {
                    stall += 1;
                    if stall >= 5 {
                        converged = true;
                        break;
                    }
                } else {
                    stall = 0;
                }
                prev_j = j;
            }
            Ok((best, best_j, iters, converged))
        });

    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().map_or(true, |b| run.1 > b.1) {
            best = Some(run);
        }
    }
    let (params, j, iterations, converged) = best.expect("at least one restart");
    Ok(TrainResult {
        solution: Solution::Angles(params),
        j,
        error: 1.0 - j,
        restarts: opts.restarts,
        iterations,
        converged,
    })
}

/// Random unitary from the polar factor of a complex Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    polar_unitary(&g)
}

/// Unitary polar factor W of A = W P. Computed from the singular value
/// decomposition, which stays unitary even when A is rank deficient (the
/// eigendecomposition of A^dag A is not usable there).
fn polar_unitary(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd with u requested");
    let v_t = svd.v_t.expect("svd with v_t requested");
    u * v_t
}

/// Riemannian gradient ascent over the unitary group with polar retraction
/// and backtracking line search; J is monotone over accepted steps.
pub fn optimize_unitary(
    states: &[DensityMatrix],
    book: &Codebook,
    opts: &TrainOpts,
) -> Result<TrainResult> {
    opts.validate()?;
    check_instance(states, book)?;
    let dim = 1usize << book.n();
    // Row supports of the outcome projectors: J only needs U rho restricted
    // to these rows, which keeps the inner loop at one matmul per state.
    let rows: Vec<Vec<usize>> = book
        .output_map()
        .iter()
        .map(|&o| {
            let proj = outcome_projector(book, o);
            (0..dim).filter(|&i| proj[(i, i)].re > 0.5).collect()
        })
        .collect();
    let weight = 2.0 / states.len() as f64;
    let propagate = |u: &CMatrix| -> Vec<CMatrix> {
        states.iter().map(|rho| u * rho.data()).collect()
    };
    let success = |u: &CMatrix, a: &[CMatrix]| -> f64 {
        // Tr(E U rho U^dag) = sum over projector rows r of (A U^dag)[r, r].
        let mut total = 0.0;
        for (ai, ri) in a.iter().zip(&rows) {
            for &r in ri {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += ai[(r, k)] * u[(r, k)].conj();
                }
                total += acc.re;
            }
        }
        total / states.len() as f64
    };

    let runs: Vec<Result<(CMatrix, f64, usize, bool)>> =
        exec::map_indexed((0..opts.restarts).collect(), |_, r| {
            let mut u = if r == 0 {
                CMatrix::identity(dim, dim)
            } else {
                random_unitary(dim, opts.restart_seed(r))
            };
            let mut a = propagate(&u);
            let mut j = success(&u, &a);
            let mut step = 1.0;
            let mut iters = 0usize;
            let mut converged = false;
            for it in 1..=opts.max_iters {
                iters = it;
                let mut grad = CMatrix::zeros(dim, dim);
                for (ai, ri) in a.iter().zip(&rows) {
                    for &row in ri {
                        for k in 0..dim {
                            grad[(row, k)] += ai[(row, k)] * C64::new(weight, 0.0);
                        }
                    }
                }
                // Backtracking on the retracted step.
                let mut accepted = false;
                for _ in 0..40 {
                    let candidate = polar_unitary(&(&u + &grad * C64::new(step, 0.0)));
                    let a_new = propagate(&candidate);
                    let j_new = success(&candidate, &a_new);
                    if j_new >= j && j_new <= 1.0 + 1e-9 {
                        let gain = j_new - j;
                        u = candidate;
                        a = a_new;
                        j = j_new;
                        step = (step * 1.3).min(1e3);
                        accepted = true;
                        if gain < opts.tol {
                            converged = true;
                        }
                        break;
                    }
                    step *= 0.5;
                }
                if converged || !accepted {
                    converged = converged || !accepted;
                    break;
                }
            }
            Ok((u, j, iters, converged))
        });

    let mut best: Option<(CMatrix, f64, usize, bool)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().map_or(true, |b| run.1 > b.1) {
            best = Some(run);
        }
    }
    let (u, j, iterations, converged) = best.expect("at least one restart");
    Ok(TrainResult {
        solution: Solution::Unitary(u),
        j,
        error: 1.0 - j,
        restarts: opts.restarts,
        iterations,
        converged,
    })
}

/// Evaluate a trained solution, optionally under noise.
pub fn evaluate(
    solution: &Solution,
    layout: Option<&CircuitLayout>,
    states: &[DensityMatrix],
    book: &Codebook,
    noise: &NoiseModel,
) -> Result<f64> {
    match solution {
        Solution::Angles(params) => {
            let layout = layout.ok_or_else(|| {
                Error::Parameter("circuit layout required to evaluate angle solutions".into())
            })?;
            cost_circuit(layout, params, states, book, noise)
        }
        Solution::Unitary(u) => cost_unitary(u, states, book, noise),
    }
}

/// Which decoder to fit in an end-to-end error evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderKind {
    Circuit(CircuitLayout),
    Unitary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub result: TrainResult,
    /// Success probability re-evaluated under the noise model.
    pub j_noisy: f64,
    pub error: f64,
    pub t_star: f64,
    pub tau: f64,
}

/// End-to-end error probability: transduce the BPSK pair, build codeword
/// states, fit the decoder noise-free, and evaluate under `noise`.
pub fn decode_error(
    beta: C64,
    channel: &crate::physmodel::TransductionChannel,
    book: &Codebook,
    kind: &DecoderKind,
    noise: &NoiseModel,
    cfg: &crate::jc::JcConfig,
    opts: &TrainOpts,
) -> Result<DecodeOutcome> {
    let pair = crate::jc::transduce_bpsk(beta, channel, cfg)?;
    let states: Vec<DensityMatrix> = book
        .codewords()
        .iter()
        .map(|bits| crate::qsim::build_codeword_state(bits, &pair))
        .collect::<Result<_>>()?;
    let result = match kind {
        DecoderKind::Circuit(layout) => train(&states, book, layout, opts)?,
        DecoderKind::Unitary => optimize_unitary(&states, book, opts)?,
    };
    let layout = match kind {
        DecoderKind::Circuit(layout) => Some(layout),
        DecoderKind::Unitary => None,
    };
    let j_noisy = evaluate(&result.solution, layout, &states, book, noise)?;
    Ok(DecodeOutcome {
        result,
        error: 1.0 - j_noisy,
        j_noisy,
        t_star: pair.t_star,
        tau: pair.tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::trace_distance;
    use approx::assert_abs_diff_eq;

    fn mixed_pair() -> (DensityMatrix, DensityMatrix) {
        let mut p = CMatrix::zeros(2, 2);
        p[(0, 0)] = C64::new(0.8, 0.0);
        p[(1, 1)] = C64::new(0.2, 0.0);
        p[(0, 1)] = C64::new(0.25, -0.1);
        p[(1, 0)] = p[(0, 1)].conj();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(0.35, 0.0);
        m[(1, 1)] = C64::new(0.65, 0.0);
        m[(0, 1)] = C64::new(-0.15, 0.2);
        m[(1, 0)] = m[(0, 1)].conj();
        (DensityMatrix::new(p).unwrap(), DensityMatrix::new(m).unwrap())
    }

    fn codeword_states(book: &Codebook, pair: &(DensityMatrix, DensityMatrix)) -> Vec<DensityMatrix> {
        let tp = crate::jc::TransducedPair {
            rho_plus: pair.0.clone(),
            rho_minus: pair.1.clone(),
            t_star: 0.0,
            tau: 0.0,
        };
        book.codewords()
            .iter()
            .map(|bits| crate::qsim::build_codeword_state(bits, &tp).unwrap())
            .collect()
    }

    #[test]
    fn parity_codebook_enumeration() {
        let book = make_codebook(3, 4, CodebookKind::Parity, 0).unwrap();
        let words: Vec<String> = book
            .codewords()
            .iter()
            .map(|w| w.iter().map(|b| b.to_string()).collect())
            .collect();
        assert_eq!(words, ["000", "011", "101", "110"]);
        assert_eq!(book.measured_qubits(), &[0, 1]);
        assert!(make_codebook(3, 3, CodebookKind::Parity, 0).is_err());
        assert!(make_codebook(2, 5, CodebookKind::Random, 0).is_err());
    }

    #[test]
    fn random_codebook_distinct_and_deterministic() {
        let a = make_codebook(10, 4, CodebookKind::Random, 7).unwrap();
        let b = make_codebook(10, 4, CodebookKind::Random, 7).unwrap();
        assert_eq!(a, b);
        for (i, w) in a.codewords().iter().enumerate() {
            for other in &a.codewords()[i + 1..] {
                assert_ne!(w, other);
            }
        }
        let c = make_codebook(10, 4, CodebookKind::Random, 8).unwrap();
        assert_ne!(a.codewords(), c.codewords());
    }

    #[test]
    fn cost_orthogonal_identity_circuit() {
        let book = make_codebook(2, 4, CodebookKind::Random, 1).unwrap();
        // States |b_i> themselves, identity circuit, index map.
        let states: Vec<DensityMatrix> = book
            .codewords()
            .iter()
            .map(|w| {
                let idx = w.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                DensityMatrix::basis_state(4, idx).unwrap()
            })
            .collect();
        // Remap outcomes to the codeword bit patterns.
        let mut book = book;
        book.output_map = book
            .codewords
            .iter()
            .map(|w| w.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
            .collect();
        let layout = CircuitLayout::nearest_neighbor(2, 0).unwrap();
        let params = vec![0.0; layout.param_count()];
        let j = cost_circuit(&layout, &params, &states, &book, &NoiseModel::noiseless()).unwrap();
        assert_abs_diff_eq!(j, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cost_identical_states_is_uniform() {
        let book = make_codebook(3, 4, CodebookKind::Parity, 0).unwrap();
        let rho = DensityMatrix::maximally_mixed(8);
        let states = vec![rho; 4];
        let layout = CircuitLayout::nearest_neighbor(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params: Vec<f64> = (0..layout.param_count())
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        let j = cost_circuit(&layout, &params, &states, &book, &NoiseModel::noiseless()).unwrap();
        assert_abs_diff_eq!(j, 0.25, epsilon = 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pair = mixed_pair();
        let book = make_codebook(2, 2, CodebookKind::Random, 3).unwrap();
        let states = codeword_states(&book, &pair);
        let layout = CircuitLayout::nearest_neighbor(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let params: Vec<f64> = (0..layout.param_count())
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        let grad = cost_gradient(&layout, &params, &states, &book).unwrap();
        let noiseless = NoiseModel::noiseless();
        let h = 1e-5;
        for k in 0..params.len() {
            let mut plus = params.clone();
            plus[k] += h;
            let mut minus = params.clone();
            minus[k] -= h;
            let fd = (cost_circuit(&layout, &plus, &states, &book, &noiseless).unwrap()
                - cost_circuit(&layout, &minus, &states, &book, &noiseless).unwrap())
                / (2.0 * h);
            assert!(
                (grad[k] - fd).abs() < 1e-6 * fd.abs().max(1.0),
                "param {k}: adjoint {} vs fd {fd}",
                grad[k]
            );
        }
    }

    #[test]
    fn gradient_vanishes_on_insensitive_angle() {
        // A lone Rz on the maximally mixed state cannot move the cost.
        let book = make_codebook(1, 2, CodebookKind::Random, 5).unwrap();
        let states = vec![DensityMatrix::maximally_mixed(2); 2];
        let layout = CircuitLayout::nearest_neighbor(1, 0).unwrap();
        let params = vec![0.3, 0.7, 1.1];
        let grad = cost_gradient(&layout, &params, &states, &book).unwrap();
        for g in grad {
            assert_abs_diff_eq!(g, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn train_separates_orthogonal_pure_states() {
        let book = make_codebook(1, 2, CodebookKind::Random, 2).unwrap();
        // |+> and |->: a single rotation maps them to the basis.
        let plus = CMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
        let minus = CMatrix::from_fn(2, 2, |r, c| {
            C64::new(if r == c { 0.5 } else { -0.5 }, 0.0)
        });
        let states = vec![
            DensityMatrix::new(plus).unwrap(),
            DensityMatrix::new(minus).unwrap(),
        ];
        let layout = CircuitLayout::nearest_neighbor(1, 0).unwrap();
        let opts = TrainOpts {
            restarts: 4,
            max_iters: 500,
            tol: 1e-10,
            seed: 1,
        };
        let result = train(&states, &book, &layout, &opts).unwrap();
        assert!(result.j > 1.0 - 1e-6, "J = {}", result.j);
        // Reported J reproducible by a fresh evaluation.
        let j = evaluate(
            &result.solution,
            Some(&layout),
            &states,
            &book,
            &NoiseModel::noiseless(),
        )
        .unwrap();
        assert_abs_diff_eq!(j, result.j, epsilon = 1e-12);
    }

    #[test]
    fn train_reaches_two_state_helstrom() {
        let pair = mixed_pair();
        let tau = trace_distance(&pair.0, &pair.1).unwrap();
        let book = make_codebook(1, 2, CodebookKind::Random, 4).unwrap();
        let states = codeword_states(&book, &pair);
        let layout = CircuitLayout::nearest_neighbor(1, 0).unwrap();
        let opts = TrainOpts {
            restarts: 4,
            max_iters: 800,
            tol: 1e-10,
            seed: 6,
        };
        let result = train(&states, &book, &layout, &opts).unwrap();
        assert_abs_diff_eq!(result.j, (1.0 + tau) / 2.0, epsilon = 1e-4);
        // Gradient is stationary at the optimum.
        if let Solution::Angles(params) = &result.solution {
            let grad = cost_gradient(&layout, params, &states, &book).unwrap();
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            assert!(norm < 1e-4, "gradient norm {norm}");
        }
    }

    #[test]
    fn unitary_reaches_two_state_helstrom() {
        let pair = mixed_pair();
        let tau = trace_distance(&pair.0, &pair.1).unwrap();
        let book = make_codebook(1, 2, CodebookKind::Random, 9).unwrap();
        let states = codeword_states(&book, &pair);
        let opts = TrainOpts {
            restarts: 3,
            max_iters: 500,
            tol: 1e-12,
            seed: 12,
        };
        let result = optimize_unitary(&states, &book, &opts).unwrap();
        assert_abs_diff_eq!(result.j, (1.0 + tau) / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn unitary_sorts_distinct_diagonal_supports() {
        // Diagonal states with disjoint supports: a permutation decodes
        // perfectly.
        let book = make_codebook(2, 4, CodebookKind::Random, 14).unwrap();
        let states: Vec<DensityMatrix> = (0..4)
            .map(|i| DensityMatrix::basis_state(4, (i + 1) % 4).unwrap())
            .collect();
        let opts = TrainOpts {
            restarts: 3,
            max_iters: 400,
            tol: 1e-12,
            seed: 3,
        };
        let result = optimize_unitary(&states, &book, &opts).unwrap();
        assert!(result.j > 1.0 - 1e-6, "J = {}", result.j);
    }

    #[test]
    fn unitary_upper_bounds_circuit() {
        let pair = mixed_pair();
        let book = make_codebook(2, 2, CodebookKind::Random, 17).unwrap();
        let states = codeword_states(&book, &pair);
        let opts = TrainOpts {
            restarts: 3,
            max_iters: 400,
            tol: 1e-10,
            seed: 8,
        };
        let layout = CircuitLayout::nearest_neighbor(2, 1).unwrap();
        let circuit = train(&states, &book, &layout, &opts).unwrap();
        let unitary = optimize_unitary(&states, &book, &opts).unwrap();
        assert!(
            unitary.j >= circuit.j - 1e-4,
            "unitary {} vs circuit {}",
            unitary.j,
            circuit.j
        );
        // M = 2 oracle in n = 2: optimal J = (1 + tau_2)/2.
        let tau2 = trace_distance(&states[0], &states[1]).unwrap();
        assert_abs_diff_eq!(unitary.j, (1.0 + tau2) / 2.0, epsilon = 1e-3);
    }

    #[test]
    fn decode_error_uniform_at_zero_signal() {
        let channel = crate::physmodel::TransductionChannel::ideal();
        let book = make_codebook(2, 4, CodebookKind::Random, 1).unwrap();
        let cfg = crate::jc::JcConfig::discrimination(crate::constants::TAU * 100e6);
        let opts = TrainOpts {
            restarts: 2,
            max_iters: 50,
            tol: 1e-9,
            seed: 0,
        };
        let outcome = decode_error(
            C64::new(0.0, 0.0),
            &channel,
            &book,
            &DecoderKind::Unitary,
            &NoiseModel::noiseless(),
            &cfg,
            &opts,
        )
        .unwrap();
        assert_abs_diff_eq!(outcome.error, 0.75, epsilon = 1e-6);
        assert_abs_diff_eq!(outcome.tau, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn training_is_deterministic() {
        let pair = mixed_pair();
        let book = make_codebook(1, 2, CodebookKind::Random, 4).unwrap();
        let states = codeword_states(&book, &pair);
        let layout = CircuitLayout::nearest_neighbor(1, 0).unwrap();
        let opts = TrainOpts {
            restarts: 3,
            max_iters: 100,
            tol: 1e-10,
            seed: 99,
        };
        let a = train(&states, &book, &layout, &opts).unwrap();
        let b = train(&states, &book, &layout, &opts).unwrap();
        assert_eq!(a, b);
    }
}
