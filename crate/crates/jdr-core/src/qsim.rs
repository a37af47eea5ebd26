//! Dense density-matrix simulator for n-qubit circuits: layered
//! CNOT-plus-single-qubit ansatz execution with optional depolarizing and
//! readout-flip noise.
//!
//! Qubit 0 is the most significant bit of a basis index, matching the
//! tensor-product order of [`build_codeword_state`].

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::jc::TransducedPair;
use crate::{C64, CMatrix};

/// Hard cap on simulated qubits (4^12 complex entries per state).
pub const MAX_QUBITS: usize = 12;

/// Euler angles of one single-qubit gate, Rz(a) Ry(b) Rz(c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    pub angles: [f64; 3],
}

impl GateParams {
    pub fn identity() -> Self {
        Self { angles: [0.0; 3] }
    }

    pub fn unitary(&self) -> Result<CMatrix> {
        if self.angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Parameter(format!(
                "gate angles must be finite, got {:?}",
                self.angles
            )));
        }
        let [a, b, c] = self.angles;
        Ok(rz(a) * ry(b) * rz(c))
    }
}

/// Rz(theta) = exp(-i theta Z / 2).
pub fn rz(theta: f64) -> CMatrix {
    let half = theta / 2.0;
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::from_polar(1.0, -half);
    m[(1, 1)] = C64::from_polar(1.0, half);
    m
}

/// Ry(theta) = exp(-i theta Y / 2).
pub fn ry(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(c, 0.0);
    m[(0, 1)] = C64::new(-s, 0.0);
    m[(1, 0)] = C64::new(s, 0.0);
    m[(1, 1)] = C64::new(c, 0.0);
    m
}

/// Depolarizing probabilities after single-qubit gates (`p1`) and CNOTs
/// (`p2`), plus a per-qubit readout flip probability (`pm`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub pm: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            pm: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("pm", self.pm)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!(
                    "noise probability {name} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.pm == 0.0
    }
}

/// Structure of the layered variational ansatz: a coupling graph partitioned
/// into parallel CNOT steps, repeated for `layers` layers. Each CNOT step is
/// preceded by a full column of single-qubit gates, and one extra column
/// closes the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitLayout {
    n: usize,
    layers: usize,
    steps: Vec<Vec<(usize, usize)>>,
}

impl CircuitLayout {
    /// Nearest-neighbor coupling: a cycle for n >= 4, an open chain for
    /// n = 2, 3, edge-colored into parallel steps.
    pub fn nearest_neighbor(n: usize, layers: usize) -> Result<Self> {
        if n < 1 || n > MAX_QUBITS {
            return Err(Error::Parameter(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n}"
            )));
        }
        let edges: Vec<(usize, usize)> = if n >= 4 {
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        } else {
            (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()
        };
        Self::from_edges(n, layers, &edges)
    }

    /// Greedy edge coloring of an arbitrary coupling graph into disjoint
    /// parallel steps.
    pub fn from_edges(n: usize, layers: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut steps: Vec<Vec<(usize, usize)>> = Vec::new();
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::Parameter(format!(
                    "invalid coupling edge ({a}, {b}) for {n} qubits"
                )));
            }
            let slot = steps.iter_mut().find(|step| {
                step.iter().all(|&(c, d)| c != a && c != b && d != a && d != b)
            });
            match slot {
                Some(step) => step.push((a, b)),
                None => steps.push(vec![(a, b)]),
            }
        }
        Ok(Self { n, layers, steps })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn steps(&self) -> &[Vec<(usize, usize)>] {
        &self.steps
    }

    pub fn steps_per_layer(&self) -> usize {
        self.steps.len()
    }

    /// Single-qubit gate columns: one before each CNOT step of each layer,
    /// plus the closing column.
    pub fn columns(&self) -> usize {
        self.steps.len() * self.layers + 1
    }

    /// 3 n (steps_per_layer * layers + 1) variational angles.
    pub fn param_count(&self) -> usize {
        3 * self.n * self.columns()
    }

    pub fn cnot_count(&self) -> usize {
        self.layers * self.steps.iter().map(Vec::len).sum::<usize>()
    }
}

/// One primitive circuit element after expansion of the layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircuitOp {
    /// Rz or Ry rotation by the parameter at `param_idx`.
    Rotation {
        qubit: usize,
        axis: RotationAxis,
        param_idx: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    Z,
    Y,
}

impl CircuitLayout {
    /// Expand into the primitive gate sequence. Rotations reference the
    /// parameter vector; the column layout is (qubit-major, Z-Y-Z per gate).
    pub fn ops(&self) -> Vec<CircuitOp> {
        let mut ops = Vec::new();
        let mut param_idx = 0;
        let mut push_column = |ops: &mut Vec<CircuitOp>| {
            for q in 0..self.n {
                for axis in [RotationAxis::Z, RotationAxis::Y, RotationAxis::Z] {
                    ops.push(CircuitOp::Rotation {
                        qubit: q,
                        axis,
                        param_idx,
                    });
                    param_idx += 1;
                }
            }
        };
        for _ in 0..self.layers {
            for step in &self.steps {
                push_column(&mut ops);
                for &(control, target) in step {
                    ops.push(CircuitOp::Cnot { control, target });
                }
            }
        }
        push_column(&mut ops);
        ops
    }
}

/// Tensor-product codeword state: bit 0 -> rho_plus, bit 1 -> rho_minus,
/// leftmost bit on the most significant qubit.
pub fn build_codeword_state(bits: &[u8], pair: &TransducedPair) -> Result<DensityMatrix> {
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(Error::Parameter(format!(
            "codeword length must be in 1..={MAX_QUBITS}, got {}",
            bits.len()
        )));
    }
    let mut state: Option<DensityMatrix> = None;
    for &bit in bits {
        let factor = match bit {
            0 => &pair.rho_plus,
            1 => &pair.rho_minus,
            other => {
                return Err(Error::Parameter(format!(
                    "codeword bits must be 0 or 1, got {other}"
                )))
            }
        };
        state = Some(match state {
            None => factor.clone(),
            Some(acc) => acc.tensor(factor),
        });
    }
    Ok(state.expect("non-empty codeword"))
}

fn check_qubit(n: usize, q: usize) -> Result<()> {
    if q >= n {
        return Err(Error::Dimension(format!("qubit {q} out of range for n = {n}")));
    }
    Ok(())
}

fn num_qubits(rho: &DensityMatrix) -> Result<usize> {
    let d = rho.dim();
    if !d.is_power_of_two() {
        return Err(Error::Dimension(format!("dimension {d} is not a power of two")));
    }
    Ok(d.trailing_zeros() as usize)
}

/// In-place rho -> (U_q (x) I) rho (U_q (x) I)^dag for a 2x2 gate on `qubit`.
pub fn apply_single_qubit_gate(rho: &mut CMatrix, n: usize, qubit: usize, u: &CMatrix) {
    let dim = 1 << n;
    let bit = 1usize << (n - 1 - qubit);
    let u00 = u[(0, 0)];
    let u01 = u[(0, 1)];
    let u10 = u[(1, 0)];
    let u11 = u[(1, 1)];
    // Left multiplication by U on the row index.
    for col in 0..dim {
        for row in 0..dim {
            if row & bit == 0 {
                let r1 = row | bit;
                let a = rho[(row, col)];
                let b = rho[(r1, col)];
                rho[(row, col)] = u00 * a + u01 * b;
                rho[(r1, col)] = u10 * a + u11 * b;
            }
        }
    }
    // Right multiplication by U^dag on the column index.
    for col in 0..dim {
        if col & bit == 0 {
            let c1 = col | bit;
            for row in 0..dim {
                let a = rho[(row, col)];
                let b = rho[(row, c1)];
                rho[(row, col)] = a * u00.conj() + b * u01.conj();
                rho[(row, c1)] = a * u10.conj() + b * u11.conj();
            }
        }
    }
}

/// In-place CNOT conjugation (a basis permutation).
pub fn apply_cnot(rho: &mut CMatrix, n: usize, control: usize, target: usize) {
    let dim = 1 << n;
    let cbit = 1usize << (n - 1 - control);
    let tbit = 1usize << (n - 1 - target);
    // Swap rows i <-> i^tbit for control-set rows.
    for col in 0..dim {
        for row in 0..dim {
            if row & cbit != 0 && row & tbit == 0 {
                rho.swap((row, col), (row | tbit, col));
            }
        }
    }
    for col in 0..dim {
        if col & cbit != 0 && col & tbit == 0 {
            for row in 0..dim {
                rho.swap((row, col), (row, col | tbit));
            }
        }
    }
}

/// In-place depolarizing channel on a qubit subset:
/// rho -> (1 - p) rho + p (I/2^k (x) Tr_S rho).
pub fn apply_depolarizing(rho: &mut CMatrix, n: usize, qubits: &[usize], p: f64) {
    if p == 0.0 {
        return;
    }
    let dim = 1 << n;
    let mask: usize = qubits.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let k = qubits.len();
    let weight = p / (1 << k) as f64;
    // Partial trace over the subset, indexed by the remaining bits.
    let mut traced = vec![C64::new(0.0, 0.0); dim * dim];
    for row in 0..dim {
        for col in 0..dim {
            if row & mask == col & mask {
                traced[(row & !mask) * dim + (col & !mask)] += rho[(row, col)];
            }
        }
    }
    for row in 0..dim {
        for col in 0..dim {
            let mut v = rho[(row, col)] * C64::new(1.0 - p, 0.0);
            if row & mask == col & mask {
                v += traced[(row & !mask) * dim + (col & !mask)] * C64::new(weight, 0.0);
            }
            rho[(row, col)] = v;
        }
    }
}

/// Execute the layered ansatz on `rho` with the given parameter vector,
/// inserting depolarizing noise after every gate per `noise`.
pub fn run_circuit(
    rho: &DensityMatrix,
    layout: &CircuitLayout,
    params: &[f64],
    noise: &NoiseModel,
) -> Result<DensityMatrix> {
    noise.validate()?;
    let n = num_qubits(rho)?;
    if n != layout.qubits() {
        return Err(Error::Dimension(format!(
            "state has {n} qubits but layout expects {}",
            layout.qubits()
        )));
    }
    if params.len() != layout.param_count() {
        return Err(Error::Parameter(format!(
            "expected {} parameters, got {}",
            layout.param_count(),
            params.len()
        )));
    }
    for step in layout.steps() {
        let mut used = 0usize;
        for &(c, t) in step {
            check_qubit(n, c)?;
            check_qubit(n, t)?;
            let bits = (1usize << c) | (1usize << t);
            if used & bits != 0 {
                return Err(Error::Parameter(
                    "CNOT step touches a qubit more than once".into(),
                ));
            }
            used |= bits;
        }
    }

    let mut out = rho.data().clone();
    let mut column = [0.0f64; 3];
    for op in layout.ops() {
        match op {
            CircuitOp::Rotation {
                qubit,
                axis,
                param_idx,
            } => {
                let theta = params[param_idx];
                if !theta.is_finite() {
                    return Err(Error::Parameter(format!(
                        "parameter {param_idx} is not finite"
                    )));
                }
                let u = match axis {
                    RotationAxis::Z => rz(theta),
                    RotationAxis::Y => ry(theta),
                };
                apply_single_qubit_gate(&mut out, n, qubit, &u);
                // One depolarizing event per physical single-qubit gate, i.e.
                // after the third rotation of each Z-Y-Z triple.
                column[param_idx % 3] = theta;
                if param_idx % 3 == 2 {
                    apply_depolarizing(&mut out, n, &[qubit], noise.p1);
                }
            }
            CircuitOp::Cnot { control, target } => {
                apply_cnot(&mut out, n, control, target);
                apply_depolarizing(&mut out, n, &[control, target], noise.p2);
            }
        }
    }
    let _ = column;
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Marginal computational-basis distribution over `measured_qubits`, with an
/// independent readout flip of probability `pm` per measured qubit. The
/// first listed qubit is the most significant bit of the outcome string.
pub fn measurement_distribution(
    rho: &DensityMatrix,
    measured_qubits: &[usize],
    pm: f64,
) -> Result<Vec<f64>> {
    let n = num_qubits(rho)?;
    if !(0.0..=1.0).contains(&pm) {
        return Err(Error::Parameter(format!("pm must lie in [0, 1], got {pm}")));
    }
    let k = measured_qubits.len();
    let mut seen = 0usize;
    for &q in measured_qubits {
        check_qubit(n, q)?;
        if seen & (1 << q) != 0 {
            return Err(Error::Parameter(format!("duplicate measured qubit {q}")));
        }
        seen |= 1 << q;
    }
    let dim = 1 << n;
    let mut probs = vec![0.0f64; 1 << k];
    for idx in 0..dim {
        let mut outcome = 0usize;
        for (pos, &q) in measured_qubits.iter().enumerate() {
            if idx & (1 << (n - 1 - q)) != 0 {
                outcome |= 1 << (k - 1 - pos);
            }
        }
        probs[outcome] += rho.data()[(idx, idx)].re;
    }
    if pm == 0.0 {
        return Ok(probs);
    }
    // Convolve with independent per-qubit flips.
    let mut flipped = vec![0.0f64; 1 << k];
    for (a, &pa) in probs.iter().enumerate() {
        for (b, slot) in flipped.iter_mut().enumerate() {
            let flips = (a ^ b).count_ones() as i32;
            *slot += pa * pm.powi(flips) * (1.0 - pm).powi(k as i32 - flips);
        }
    }
    Ok(flipped)
}

/// Eigen-decomposition of a state into a pure-state ensemble; eigenvalues
/// below 1e-12 are dropped and the rest renormalized ordering-descending.
pub fn eigen_ensemble(rho: &DensityMatrix) -> Vec<(f64, crate::CVector)> {
    let (values, vectors) = crate::fock::hermitian_eigen(rho.data());
    let mut ensemble: Vec<(f64, crate::CVector)> = values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= 1e-12)
        .map(|(i, &l)| (l, vectors.column(i).into_owned()))
        .collect();
    ensemble.sort_by(|a, b| b.0.total_cmp(&a.0));
    ensemble
}
