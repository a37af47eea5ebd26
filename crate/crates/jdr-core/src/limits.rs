//! Classical baselines and information-theoretic quantities: Helstrom error
//! limits, the pulse-by-pulse C1 capacity, Holevo information, and the
//! capacity of the transduced-qubit channel.

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::jc::JcConfig;
use crate::physmodel::TransductionChannel;
use crate::{C64, CMatrix};

/// A finite ensemble of states with prior probabilities.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, DensityMatrix)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Parameter("ensemble must be non-empty".into()));
        }
        let dim = members[0].1.dim();
        let mut total = 0.0;
        for (p, rho) in &members {
            if !(*p >= 0.0) {
                return Err(Error::Parameter(format!(
                    "prior probabilities must be non-negative, got {p}"
                )));
            }
            if rho.dim() != dim {
                return Err(Error::Dimension(format!(
                    "ensemble states must share a dimension, got {} and {dim}",
                    rho.dim()
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "prior probabilities must sum to 1, got {total}"
            )));
        }
        Ok(Self { members })
    }

    pub fn equal_priors(states: Vec<DensityMatrix>) -> Result<Self> {
        let p = 1.0 / states.len().max(1) as f64;
        Self::new(states.into_iter().map(|s| (p, s)).collect())
    }

    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }

    /// Prior-weighted average state.
    pub fn average(&self) -> DensityMatrix {
        let dim = self.members[0].1.dim();
        let mut avg = CMatrix::zeros(dim, dim);
        for (p, rho) in &self.members {
            avg += rho.data() * C64::new(*p, 0.0);
        }
        DensityMatrix::from_matrix_unchecked(avg)
    }
}

/// Binary entropy in bits, with h2(0) = h2(1) = 0 by continuity.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Von Neumann entropy in bits from the eigenvalue spectrum, with
/// 0 log 0 = 0; eigenvalues below -1e-12 are rejected, small negatives
/// clamped.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for l in rho.eigenvalues() {
        if l < -1e-12 {
            return Err(Error::Numerical(format!(
                "state has eigenvalue {l} below tolerance"
            )));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Helstrom error probability for a single equal-prior BPSK pulse at
/// received mean photon number `rmpn`.
pub fn helstrom_bpsk(rmpn: f64) -> Result<f64> {
    if !(rmpn >= 0.0) {
        return Err(Error::Parameter(format!(
            "received mean photon number must be non-negative, got {rmpn}"
        )));
    }
    Ok(0.5 - 0.5 * (1.0 - (-4.0 * rmpn).exp()).sqrt())
}

/// Minimum error of pulse-by-pulse detection over an n-pulse codeword:
/// p = 1 - (1 - p_H)^(n-1).
pub fn n_helstrom(rmpn: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "pulse-by-pulse bound needs n >= 2, got {n}"
        )));
    }
    let ph = helstrom_bpsk(rmpn)?;
    Ok(1.0 - (1.0 - ph).powi(n as i32 - 1))
}

/// Single-pulse classical capacity C1 = 1 - h2(p_H), bits per pulse.
pub fn c1_capacity(rmpn: f64) -> Result<f64> {
    Ok(1.0 - binary_entropy(helstrom_bpsk(rmpn)?))
}

/// Holevo information of an ensemble, bits.
pub fn holevo(ensemble: &Ensemble) -> Result<f64> {
    let avg_entropy = von_neumann_entropy(&ensemble.average())?;
    let mut conditional = 0.0;
    for (p, rho) in ensemble.members() {
        if *p > 0.0 {
            conditional += p * von_neumann_entropy(rho)?;
        }
    }
    Ok((avg_entropy - conditional).max(0.0))
}

/// Holevo bound of the equal-prior optical BPSK pair at `rmpn`:
/// h2((1 - e^{-2 rmpn}) / 2).
pub fn holevo_optical_bpsk(rmpn: f64) -> Result<f64> {
    if !(rmpn >= 0.0) {
        return Err(Error::Parameter(format!(
            "received mean photon number must be non-negative, got {rmpn}"
        )));
    }
    Ok(binary_entropy((1.0 - (-2.0 * rmpn).exp()) / 2.0))
}

/// Per-pulse Holevo information of the transduced qubit pair, maximized
/// over the interaction-time window of `cfg` and over deliberate receiver
/// attenuation.
///
/// Within a finite time window the single-qubit transfer is not monotone in
/// the microwave photon number, so a receiver that can discard photons does
/// strictly better in a narrow band; taking the supremum over attenuated
/// inputs makes the capacity monotone in RMPN and preserves the
/// data-processing ordering between channels.
pub fn jdr_capacity(rmpn: f64, channel: &TransductionChannel, cfg: &JcConfig) -> Result<f64> {
    if !(rmpn >= 0.0) {
        return Err(Error::Parameter(format!(
            "received mean photon number must be non-negative, got {rmpn}"
        )));
    }
    let single_shot = |r: f64| -> Result<f64> {
        let alpha0 = C64::new((channel.eta_tr * r).sqrt(), 0.0);
        let (plus, _) =
            crate::fock::displaced_thermal_auto(channel.nbar_tr, alpha0, cfg.leakage_tol)?;
        let (minus, _) =
            crate::fock::displaced_thermal_auto(channel.nbar_tr, -alpha0, cfg.leakage_tol)?;
        let chi_at = |t: f64| -> Result<f64> {
            let rho_plus = crate::jc::jc_evolve(&plus, t, cfg.chi)?;
            let rho_minus = crate::jc::jc_evolve(&minus, t, cfg.chi)?;
            holevo(&Ensemble::new(vec![(0.5, rho_plus), (0.5, rho_minus)])?)
        };
        let (_, capacity) = crate::jc::optimize_interaction_time(cfg, chi_at)?;
        Ok(capacity.max(0.0))
    };
    // Coarse scan plus golden-section refinement over the retained fraction.
    const POINTS: usize = 21;
    let mut best = (rmpn, single_shot(rmpn)?);
    for i in 1..POINTS {
        let r = rmpn * i as f64 / (POINTS - 1) as f64;
        let value = single_shot(r)?;
        if value > best.1 {
            best = (r, value);
        }
    }
    let step = rmpn / (POINTS - 1) as f64;
    let (mut a, mut b) = ((best.0 - step).max(0.0), (best.0 + step).min(rmpn));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    if b > a {
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = single_shot(x1)?;
        let mut f2 = single_shot(x2)?;
        for _ in 0..40 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = single_shot(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = single_shot(x1)?;
            }
        }
        let refined = single_shot(0.5 * (a + b))?;
        if refined > best.1 {
            best.1 = refined;
        }
    }
    Ok(best.1)
}

/// Log-spaced grid, matching the capacity-sweep default of 40 points in
/// [1e-3, 10].
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Parameter(format!(
            "grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::Parameter(format!(
            "grid needs at least 2 points, got {points}"
        )));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CVector;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn helstrom_endpoints_and_value() {
        assert_abs_diff_eq!(helstrom_bpsk(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(helstrom_bpsk(100.0).unwrap() < 1e-15);
        let expected = 0.5 - 0.5 * (1.0 - (-0.8f64).exp()).sqrt();
        assert_abs_diff_eq!(helstrom_bpsk(0.2).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.1290, epsilon = 1e-4);
        assert!(helstrom_bpsk(-0.1).is_err());
    }

    #[test]
    fn n_helstrom_composition() {
        let ph = helstrom_bpsk(0.2).unwrap();
        assert_abs_diff_eq!(n_helstrom(0.2, 2).unwrap(), ph, epsilon = 1e-15);
        assert_abs_diff_eq!(n_helstrom(0.0, 3).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(
            n_helstrom(0.2, 3).unwrap(),
            1.0 - (1.0 - ph).powi(2),
            epsilon = 1e-15
        );
        assert!(n_helstrom(0.2, 1).is_err());
    }

    #[test]
    fn c1_endpoints_and_value() {
        assert_abs_diff_eq!(c1_capacity(0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c1_capacity(100.0).unwrap(), 1.0, epsilon = 1e-12);
        let expected = 1.0 - binary_entropy(0.5 - 0.5 * (1.0 - (-0.8f64).exp()).sqrt());
        assert_abs_diff_eq!(c1_capacity(0.2).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.4443, epsilon = 2e-3);
    }

    #[test]
    fn binary_entropy_properties() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            binary_entropy(0.3),
            binary_entropy(0.7),
            epsilon = 1e-15
        );
    }

    #[test]
    fn entropy_cases() {
        let pure = DensityMatrix::basis_state(4, 1).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&pure).unwrap(), 0.0, epsilon = 1e-10);
        let mixed = DensityMatrix::maximally_mixed(8);
        assert_abs_diff_eq!(von_neumann_entropy(&mixed).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn holevo_trivial_ensembles() {
        let rho = DensityMatrix::maximally_mixed(2);
        let same = Ensemble::equal_priors(vec![rho.clone(), rho]).unwrap();
        assert_abs_diff_eq!(holevo(&same).unwrap(), 0.0, epsilon = 1e-12);

        let basis = Ensemble::equal_priors(vec![
            DensityMatrix::basis_state(2, 0).unwrap(),
            DensityMatrix::basis_state(2, 1).unwrap(),
        ])
        .unwrap();
        assert_abs_diff_eq!(holevo(&basis).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn holevo_of_pure_bpsk_pair_matches_gram_oracle() {
        // Coherent pair |beta>, |-beta> truncated to a large Fock space.
        for rmpn in [0.05f64, 0.2, 1.0] {
            let beta = rmpn.sqrt();
            let dim = 32;
            let amp = |alpha: f64, n: usize| -> f64 {
                (-alpha * alpha / 2.0).exp() * alpha.powi(n as i32)
                    / (1..=n).map(|k| k as f64).product::<f64>().sqrt()
            };
            let psi_p = CVector::from_iterator(dim, (0..dim).map(|n| C64::new(amp(beta, n), 0.0)));
            let psi_m = CVector::from_iterator(dim, (0..dim).map(|n| C64::new(amp(-beta, n), 0.0)));
            let psi_p = &psi_p / C64::new(psi_p.norm(), 0.0);
            let psi_m = &psi_m / C64::new(psi_m.norm(), 0.0);
            let ens = Ensemble::equal_priors(vec![
                DensityMatrix::pure(&psi_p).unwrap(),
                DensityMatrix::pure(&psi_m).unwrap(),
            ])
            .unwrap();
            let expected = binary_entropy((1.0 - (-2.0 * rmpn).exp()) / 2.0);
            assert_abs_diff_eq!(holevo(&ens).unwrap(), expected, epsilon = 1e-6);
            assert_abs_diff_eq!(holevo_optical_bpsk(rmpn).unwrap(), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn ensemble_validation() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(Ensemble::new(vec![(0.6, rho.clone()), (0.6, rho.clone())]).is_err());
        assert!(Ensemble::new(vec![(-0.1, rho.clone()), (1.1, rho.clone())]).is_err());
        assert!(Ensemble::new(vec![
            (0.5, rho.clone()),
            (0.5, DensityMatrix::maximally_mixed(4))
        ])
        .is_err());
        assert!(Ensemble::new(vec![]).is_err());
    }

    #[test]
    fn jdr_capacity_endpoints_and_ordering() {
        let chi = crate::constants::TAU * 100e6;
        let cfg = JcConfig::capacity(chi);
        let ideal = TransductionChannel::ideal();
        assert_abs_diff_eq!(jdr_capacity(0.0, &ideal, &cfg).unwrap(), 0.0, epsilon = 1e-9);

        let rmpn = 0.3;
        let cap_ideal = jdr_capacity(rmpn, &ideal, &cfg).unwrap();
        // Low-noise physical channel at 1 mK.
        let params = crate::physmodel::TransducerParams::fiducial(1e-3);
        let cold = crate::physmodel::transduction_channel_equilibrium(&params).unwrap();
        let cap_cold = jdr_capacity(rmpn, &cold, &cfg).unwrap();
        let c1 = c1_capacity(rmpn).unwrap();
        assert!(cap_ideal >= cap_cold - 1e-9, "{cap_ideal} vs {cap_cold}");
        assert!(cap_cold > c1, "cold {cap_cold} vs C1 {c1}");
        // Data processing: transduction cannot beat the optical pair.
        let optical = holevo_optical_bpsk(rmpn).unwrap();
        assert!(cap_ideal <= optical + 1e-9, "{cap_ideal} vs {optical}");
    }

    #[test]
    fn log_grid_shape() {
        let g = log_grid(1e-3, 10.0, 40).unwrap();
        assert_eq!(g.len(), 40);
        assert_abs_diff_eq!(g[0], 1e-3, epsilon = 1e-12);
        assert_abs_diff_eq!(g[39], 10.0, epsilon = 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(0.0, 1.0, 10).is_err());
        assert!(log_grid(1.0, 10.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn helstrom_monotone(a in 0.0f64..5.0, d in 1e-6f64..2.0) {
            let pa = helstrom_bpsk(a).unwrap();
            let pb = helstrom_bpsk(a + d).unwrap();
            prop_assert!(pb < pa);
            prop_assert!((0.0..=0.5).contains(&pa));
        }

        #[test]
        fn n_helstrom_monotone_in_n(rmpn in 1e-3f64..2.0, n in 2usize..10) {
            let lo = n_helstrom(rmpn, n).unwrap();
            let hi = n_helstrom(rmpn, n + 1).unwrap();
            prop_assert!(hi > lo);
        }

        #[test]
        fn c1_below_optical_holevo(rmpn in 1e-3f64..5.0) {
            let c1 = c1_capacity(rmpn).unwrap();
            let chi = holevo_optical_bpsk(rmpn).unwrap();
            prop_assert!(c1 <= chi + 1e-12, "C1 {} vs Holevo {}", c1, chi);
        }
    }
}
