//! End-to-end acceptance gate. Each test prints one pass/fail line for its
//! criterion; run with `--nocapture` to see them on success.

use jdr_core::constants::TAU;
use jdr_core::decoder::{
    cost_circuit, cost_gradient, evaluate, make_codebook, optimize_unitary, train, Codebook,
    CodebookKind, Solution, TrainOpts,
};
use jdr_core::fock::{displaced_thermal_auto, trace_distance, DensityMatrix};
use jdr_core::jc::{
    excitation_operator, jc_joint_unitary, joint_ground_state, transduce_bpsk, JcConfig,
};
use jdr_core::limits::{c1_capacity, jdr_capacity, log_grid, n_helstrom};
use jdr_core::physmodel::{transduction_channel_equilibrium, TransducerParams, TransductionChannel};
use jdr_core::qsim::{
    build_codeword_state, eigen_ensemble, measurement_distribution, run_circuit, CircuitLayout,
    NoiseModel,
};
use jdr_core::{C64, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHI: f64 = TAU * 100e6;

fn channel_at(temperature: f64) -> TransductionChannel {
    let params = TransducerParams::fiducial(temperature);
    transduction_channel_equilibrium(&params).unwrap()
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {criterion}: {verdict} — {detail}");
    assert!(pass, "{criterion}: {detail}");
}

fn transduced_states(
    rmpn: f64,
    channel: &TransductionChannel,
    book: &Codebook,
) -> (Vec<DensityMatrix>, f64) {
    let beta = C64::new(rmpn.sqrt(), 0.0);
    let pair = transduce_bpsk(beta, channel, &JcConfig::discrimination(CHI)).unwrap();
    let states = book
        .codewords()
        .iter()
        .map(|bits| build_codeword_state(bits, &pair).unwrap())
        .collect();
    (states, pair.tau)
}

#[test]
fn criterion_01_table_i_transduction() {
    let warm = channel_at(1.0);
    let cold = channel_at(1e-3);
    let pass = (warm.eta_tr - 0.924).abs() <= 0.002
        && (cold.eta_tr - 0.924).abs() <= 0.002
        && (warm.nbar_tr - 1.8).abs() <= 0.2
        && cold.nbar_tr <= 0.005;
    report(
        "criterion 1 (Table I transduction)",
        pass,
        &format!(
            "1 K: eta={:.4}, nbar={:.3}; 1 mK: eta={:.4}, nbar={:.5}",
            warm.eta_tr, warm.nbar_tr, cold.eta_tr, cold.nbar_tr
        ),
    );
}

#[test]
fn criterion_02_two_state_helstrom_oracle() {
    let channel = channel_at(1e-3);
    let book = make_codebook(1, 2, CodebookKind::Random, 0).unwrap();
    let layout = CircuitLayout::nearest_neighbor(1, 0).unwrap();
    let opts = TrainOpts {
        restarts: 4,
        max_iters: 800,
        tol: 1e-10,
        seed: 11,
    };
    let mut worst = 0.0f64;
    for i in 0..10 {
        let rmpn = 0.05 + 0.95 * i as f64 / 9.0;
        let (states, _) = transduced_states(rmpn, &channel, &book);
        let tau = trace_distance(&states[0], &states[1]).unwrap();
        let target = (1.0 + tau) / 2.0;
        let trained = train(&states, &book, &layout, &opts).unwrap();
        let unitary = optimize_unitary(&states, &book, &opts).unwrap();
        worst = worst
            .max((trained.j - target).abs())
            .max((unitary.j - target).abs());
    }
    report(
        "criterion 2 (two-state Helstrom oracle)",
        worst < 1e-3,
        &format!("worst |J - (1+tau)/2| = {worst:.2e} over 10 RMPN values"),
    );
}

#[test]
fn criterion_03_quantum_advantage_region() {
    let channel = channel_at(1e-3);
    let book = make_codebook(3, 4, CodebookKind::Parity, 0).unwrap();
    let layout = CircuitLayout::nearest_neighbor(3, 3).unwrap();
    let train_opts = TrainOpts {
        restarts: 8,
        max_iters: 1500,
        tol: 1e-10,
        seed: 23,
    };
    let unitary_opts = TrainOpts {
        restarts: 4,
        max_iters: 600,
        tol: 1e-11,
        seed: 31,
    };
    let mut any_advantage = false;
    let mut worst_gap = 0.0f64;
    let mut detail = String::new();
    for rmpn in [0.1, 0.2, 0.3] {
        let (states, _) = transduced_states(rmpn, &channel, &book);
        let trained = train(&states, &book, &layout, &train_opts).unwrap();
        let unitary = optimize_unitary(&states, &book, &unitary_opts).unwrap();
        let bound = n_helstrom(rmpn, 3).unwrap();
        if trained.error < bound {
            any_advantage = true;
        }
        worst_gap = worst_gap.max((unitary.j - trained.j).abs());
        detail.push_str(&format!(
            "rmpn {rmpn}: 1-J={:.4} vs helstrom {:.4}; ",
            trained.error, bound
        ));
    }
    report(
        "criterion 3 (quantum advantage, n=3 L=3)",
        any_advantage && worst_gap < 1e-3,
        &format!("{detail}max |J_circuit - J_unitary| = {worst_gap:.2e}"),
    );
}

#[test]
fn criterion_04_no_advantage_at_1k() {
    let channel = channel_at(1.0);
    let opts = TrainOpts {
        restarts: 3,
        max_iters: 400,
        tol: 1e-10,
        seed: 5,
    };
    let grid = log_grid(0.01, 1.0, 8).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for n in [3usize, 4] {
        let book = make_codebook(n, 1 << (n - 1), CodebookKind::Parity, 0).unwrap();
        let mut min_margin = f64::INFINITY;
        for &rmpn in &grid {
            let (states, _) = transduced_states(rmpn, &channel, &book);
            let unitary = optimize_unitary(&states, &book, &opts).unwrap();
            let bound = n_helstrom(rmpn, n).unwrap();
            min_margin = min_margin.min(unitary.error - bound);
            if unitary.error < bound - 1e-9 {
                pass = false;
            }
        }
        detail.push_str(&format!("n={n}: min(1-J - helstrom) = {min_margin:.3e}; "));
    }
    report("criterion 4 (no advantage at 1 K)", pass, &detail);
}

#[test]
fn criterion_05_codeword_size_trend() {
    let channel = channel_at(1e-3);
    let rmpn = 0.2;
    let mut errors = Vec::new();
    for (n, opts) in [
        (
            4usize,
            TrainOpts {
                restarts: 3,
                max_iters: 500,
                tol: 1e-11,
                seed: 7,
            },
        ),
        (
            6,
            TrainOpts {
                restarts: 2,
                max_iters: 400,
                tol: 1e-10,
                seed: 7,
            },
        ),
        (
            8,
            TrainOpts {
                restarts: 2,
                max_iters: 250,
                tol: 1e-9,
                seed: 7,
            },
        ),
    ] {
        // Four codewords: the 2-bit message repeated across the pulses, so
        // pairwise distance grows with n.
        let codewords: Vec<Vec<u8>> = (0..4usize)
            .map(|msg| {
                (0..n)
                    .map(|b| ((msg >> (1 - b % 2)) & 1) as u8)
                    .collect()
            })
            .collect();
        let book = Codebook::new(n, codewords, (0..4).collect(), vec![0, 1]).unwrap();
        let (states, _) = transduced_states(rmpn, &channel, &book);
        let unitary = optimize_unitary(&states, &book, &opts).unwrap();
        errors.push((n, unitary.error));
    }
    let pass = errors[0].1 > errors[1].1 && errors[1].1 > errors[2].1;
    report(
        "criterion 5 (codeword-size trend, M=4)",
        pass,
        &format!(
            "1-J at n=4,6,8: {:.4}, {:.4}, {:.4}",
            errors[0].1, errors[1].1, errors[2].1
        ),
    );
}

#[test]
fn criterion_06_ansatz_bookkeeping() {
    let params_4_2 = CircuitLayout::nearest_neighbor(4, 2).unwrap().param_count();
    let cnots_3_3 = CircuitLayout::nearest_neighbor(3, 3).unwrap().cnot_count();
    let cnots_4_4 = CircuitLayout::nearest_neighbor(4, 4).unwrap().cnot_count();
    report(
        "criterion 6 (ansatz bookkeeping)",
        params_4_2 == 60 && cnots_3_3 == 6 && cnots_4_4 == 16,
        &format!(
            "params(n=4,L=2)={params_4_2}, cnots(n=3,L=3)={cnots_3_3}, cnots(n=4,L=4)={cnots_4_4}"
        ),
    );
}

#[test]
fn criterion_07_optimal_time_regimes() {
    let channel = channel_at(1e-3);
    let cfg = JcConfig::discrimination(CHI);
    let grid_step = cfg.time_window / CHI / (cfg.grid_points - 1) as f64;
    let mut pass = true;
    let mut detail = String::new();
    for mpn in [0.05f64, 0.10, 1.0 / 6.0] {
        let beta = C64::new((mpn / channel.eta_tr).sqrt(), 0.0);
        let pair = transduce_bpsk(beta, &channel, &cfg).unwrap();
        let target = std::f64::consts::PI / (2.0 * CHI);
        if (pair.t_star - target).abs() > grid_step {
            pass = false;
        }
        detail.push_str(&format!(
            "mpn {mpn:.3}: t*={:.4e} vs pi/2chi={target:.4e}; ",
            pair.t_star
        ));
    }
    for mpn in [0.3f64, 0.5, 1.0] {
        let beta = C64::new((mpn / channel.eta_tr).sqrt(), 0.0);
        let pair = transduce_bpsk(beta, &channel, &cfg).unwrap();
        let target =
            std::f64::consts::PI / (4.0 * CHI * (mpn + 1.5 * channel.nbar_tr).sqrt());
        if (pair.t_star - target).abs() > 0.1 * target {
            pass = false;
        }
        detail.push_str(&format!(
            "mpn {mpn:.2}: t*={:.4e} vs fit {target:.4e}; ",
            pair.t_star
        ));
    }
    report("criterion 7 (optimal-time regimes)", pass, &detail);
}

#[test]
fn criterion_08_capacity_ordering() {
    let cold = channel_at(1e-3);
    let ideal = TransductionChannel::ideal();
    let cfg = JcConfig::capacity(CHI);
    let grid = log_grid(1e-3, 10.0, 40).unwrap();
    let mut ordering_ok = true;
    let mut low_rmpn_ok = true;
    let mut crossing = None;
    let mut prev: Option<(f64, f64)> = None;
    for &rmpn in &grid {
        let cap_ideal = jdr_capacity(rmpn, &ideal, &cfg).unwrap();
        let cap_cold = jdr_capacity(rmpn, &cold, &cfg).unwrap();
        let c1 = c1_capacity(rmpn).unwrap();
        if cap_ideal < cap_cold - 1e-9 {
            ordering_ok = false;
        }
        if rmpn <= 0.5 && (cap_ideal <= c1 || cap_cold <= c1) {
            low_rmpn_ok = false;
        }
        let gap = cap_cold - c1;
        if let Some((prev_rmpn, prev_gap)) = prev {
            if crossing.is_none() && prev_gap > 0.0 && gap <= 0.0 {
                // Linear interpolation of the sign change.
                crossing = Some(prev_rmpn + (rmpn - prev_rmpn) * prev_gap / (prev_gap - gap));
            }
        }
        prev = Some((rmpn, gap));
    }
    let crossing_ok = crossing.is_some_and(|x| (x - 0.8).abs() <= 0.3);
    report(
        "criterion 8 (capacity ordering)",
        ordering_ok && low_rmpn_ok && crossing_ok,
        &format!(
            "ideal>=cold everywhere: {ordering_ok}; both > C1 for rmpn<=0.5: {low_rmpn_ok}; \
             cold/C1 crossing at {:?}",
            crossing
        ),
    );
}

#[test]
fn criterion_09_noise_robustness() {
    let channel = channel_at(1e-3);
    let rmpn = 0.2;
    let book = make_codebook(3, 4, CodebookKind::Parity, 0).unwrap();
    let layout = CircuitLayout::nearest_neighbor(3, 3).unwrap();
    let opts = TrainOpts {
        restarts: 8,
        max_iters: 1500,
        tol: 1e-10,
        seed: 41,
    };
    let (states, _) = transduced_states(rmpn, &channel, &book);
    let trained = train(&states, &book, &layout, &opts).unwrap();
    let noise = NoiseModel {
        p1: 0.001,
        p2: 0.01,
        pm: 0.01,
    };
    let j_noisy = evaluate(&trained.solution, Some(&layout), &states, &book, &noise).unwrap();
    let bound = n_helstrom(rmpn, 3).unwrap();
    report(
        "criterion 9 (noise robustness)",
        1.0 - j_noisy < bound,
        &format!("noisy 1-J = {:.4} vs 3-Helstrom {:.4}", 1.0 - j_noisy, bound),
    );
}

#[test]
fn criterion_10_property_suites() {
    let mut pass = true;
    let mut detail = String::new();

    // Trace preservation and positivity under a noisy circuit.
    let channel = channel_at(1e-3);
    let book = make_codebook(3, 4, CodebookKind::Parity, 0).unwrap();
    let layout = CircuitLayout::nearest_neighbor(3, 2).unwrap();
    let (states, _) = transduced_states(0.2, &channel, &book);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let params: Vec<f64> = (0..layout.param_count())
        .map(|_| rng.gen_range(0.0..TAU))
        .collect();
    let noise = NoiseModel {
        p1: 0.02,
        p2: 0.05,
        pm: 0.01,
    };
    let out = run_circuit(&states[0], &layout, &params, &noise).unwrap();
    let trace_ok = (out.trace().re - 1.0).abs() < 1e-10
        && out.eigenvalues().into_iter().all(|l| l > -1e-10);
    pass &= trace_ok;
    detail.push_str(&format!("trace/positivity: {trace_ok}; "));

    // Measurement distributions stay normalized.
    let probs = measurement_distribution(&out, book.measured_qubits(), noise.pm).unwrap();
    let norm_ok = (probs.iter().sum::<f64>() - 1.0).abs() < 1e-10;
    pass &= norm_ok;
    detail.push_str(&format!("measurement normalization: {norm_ok}; "));

    // Jaynes-Cummings excitation conservation.
    let (field, _) = displaced_thermal_auto(0.3, C64::new(0.7, 0.2), 1e-10).unwrap();
    let joint = joint_ground_state(&field);
    let t = 0.4 / CHI;
    let u = jc_joint_unitary(field.dim(), t, CHI);
    let evolved = DensityMatrix::from_matrix_unchecked(&u * joint.data() * u.adjoint());
    let n_op = excitation_operator(field.dim());
    let jc_ok = (joint.expect(&n_op) - evolved.expect(&n_op)).abs() < 1e-9;
    pass &= jc_ok;
    detail.push_str(&format!("JC excitation conservation: {jc_ok}; "));

    // Adjoint gradient vs central finite differences.
    let grad = cost_gradient(&layout, &params, &states, &book).unwrap();
    let h = 1e-5;
    let mut grad_ok = true;
    for k in (0..params.len()).step_by(7) {
        let mut plus = params.clone();
        plus[k] += h;
        let mut minus = params.clone();
        minus[k] -= h;
        let clean = NoiseModel::noiseless();
        let fd = (cost_circuit(&layout, &plus, &states, &book, &clean).unwrap()
            - cost_circuit(&layout, &minus, &states, &book, &clean).unwrap())
            / (2.0 * h);
        if (grad[k] - fd).abs() > 1e-6 * fd.abs().max(1.0) {
            grad_ok = false;
        }
    }
    pass &= grad_ok;
    detail.push_str(&format!("gradient vs finite differences: {grad_ok}; "));

    // Eigen-ensemble linearity through a circuit.
    let ensemble = eigen_ensemble(&states[1]);
    let clean = NoiseModel::noiseless();
    let direct = run_circuit(&states[1], &layout, &params, &clean).unwrap();
    let mut averaged = CMatrix::zeros(8, 8);
    for (w, psi) in &ensemble {
        let pure = DensityMatrix::pure(psi).unwrap();
        let evolved = run_circuit(&pure, &layout, &params, &clean).unwrap();
        averaged += evolved.data() * C64::new(*w, 0.0);
    }
    let linear_ok = (averaged - direct.data()).norm() < 1e-9;
    pass &= linear_ok;
    detail.push_str(&format!("eigen-ensemble linearity: {linear_ok}; "));

    // Seeded training determinism.
    let opts = TrainOpts {
        restarts: 2,
        max_iters: 60,
        tol: 1e-10,
        seed: 77,
    };
    let small_layout = CircuitLayout::nearest_neighbor(3, 1).unwrap();
    let a = train(&states, &book, &small_layout, &opts).unwrap();
    let b = train(&states, &book, &small_layout, &opts).unwrap();
    let det_ok = a == b
        && matches!((&a.solution, &b.solution), (Solution::Angles(x), Solution::Angles(y)) if x == y);
    pass &= det_ok;
    detail.push_str(&format!("seeded determinism: {det_ok}"));

    report("criterion 10 (property suites)", pass, &detail);
}
