//! Optomechanical transduction chain: physical device parameters to the
//! effective attenuation / heating channel of the optical-to-microwave
//! sequential-swap transfer.

use crate::constants::{HBAR, KB, TAU};
use crate::error::{Error, Result};
use crate::quad;
use crate::C64;

/// Physical parameters of the optical-cavity / mechanical-oscillator /
/// microwave-cavity chain. All rates are angular (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct TransducerParams {
    /// Optical cavity frequency.
    pub omega1: f64,
    /// Mechanical oscillator frequency.
    pub omega2: f64,
    /// Microwave cavity frequency.
    pub omega3: f64,
    /// Optical cavity linewidth.
    pub kappa1: f64,
    /// Microwave cavity linewidth.
    pub kappa3: f64,
    /// Mechanical damping rate.
    pub gamma: f64,
    /// Bare optomechanical couplings.
    pub g1_max: f64,
    pub g3_max: f64,
    /// Drive-enhanced (linearized) couplings.
    pub g1_lin_max: f64,
    pub g3_lin_max: f64,
    /// Mechanical reservoir temperature, kelvin.
    pub temperature: f64,
}

impl TransducerParams {
    /// Fiducial device parameters: 1550 nm optical cavity, 10 MHz mechanical
    /// oscillator, 10 GHz microwave cavity, 50 kHz cavity linewidths, 500 Hz
    /// mechanical damping, couplings amplified to 1 MHz.
    pub fn fiducial(temperature: f64) -> Self {
        Self {
            omega1: TAU * 31e12,
            omega2: TAU * 10e6,
            omega3: TAU * 10e9,
            kappa1: TAU * 50e3,
            kappa3: TAU * 50e3,
            gamma: TAU * 500.0,
            g1_max: TAU * 10.0,
            g3_max: TAU * 5.0,
            g1_lin_max: TAU * 1e6,
            g3_lin_max: TAU * 1e6,
            temperature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("omega3", self.omega3),
            ("kappa1", self.kappa1),
            ("kappa3", self.kappa3),
            ("gamma", self.gamma),
            ("g1_max", self.g1_max),
            ("g3_max", self.g3_max),
            ("g1_lin_max", self.g1_lin_max),
            ("g3_lin_max", self.g3_lin_max),
            ("temperature", self.temperature),
        ];
        for (name, value) in rates {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Parameter(format!(
                    "{name} must be strictly positive and finite, got {value}"
                )));
            }
        }
        if !(self.omega1 > self.omega3 && self.omega3 > self.omega2) {
            return Err(Error::Parameter(
                "energy scales must satisfy omega1 > omega3 > omega2".into(),
            ));
        }
        Ok(())
    }

    /// Warnings when the strong-coupling margin G_j >= 10 max(kappa_j, gamma)
    /// is violated; the swap protocol degrades outside this regime.
    pub fn strong_coupling_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for (name, g, kappa) in [
            ("G1", self.g1_lin_max, self.kappa1),
            ("G3", self.g3_lin_max, self.kappa3),
        ] {
            let floor = 10.0 * kappa.max(self.gamma);
            if g < floor {
                warnings.push(format!(
                    "{name} = {g:.3e} rad/s is below the strong-coupling margin {floor:.3e}"
                ));
            }
        }
        warnings
    }

    /// Reservoir thermal occupation at the mechanical frequency.
    pub fn reservoir_occupation(&self) -> Result<f64> {
        thermal_occupation(self.omega2, self.temperature)
    }
}

/// Coherent drive configuration for the two cavities.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveConfig {
    /// Complex drive amplitudes (rad/s).
    pub e1: C64,
    pub e3: C64,
    /// Drive detunings Delta_j (rad/s).
    pub delta1: f64,
    pub delta3: f64,
}

/// Steady-state amplitudes of the driven, dissipative chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub b1: C64,
    pub b2: C64,
    pub b3: C64,
    /// Mechanical quadrature offset (B2 + B2*)/sqrt(2).
    pub q2: f64,
}

/// Effective channel of the optical-to-microwave map: attenuation `eta_tr`,
/// added thermal occupation `nbar_tr`, and the two swap durations.
#[derive(Debug, Clone, PartialEq)]
pub struct TransductionChannel {
    pub eta_tr: f64,
    pub nbar_tr: f64,
    pub tau1: f64,
    pub tau3: f64,
}

impl TransductionChannel {
    /// Lossless, noiseless channel.
    pub fn ideal() -> Self {
        Self {
            eta_tr: 1.0,
            nbar_tr: 0.0,
            tau1: 0.0,
            tau3: 0.0,
        }
    }

    /// Fold in the compensation-drive loss e^{-kappa3} that removes the
    /// steady-state field offset. Off by default in the pipelines.
    pub fn with_compensation_loss(mut self, kappa3: f64) -> Self {
        self.eta_tr *= (-kappa3).exp();
        self
    }
}

/// Bose-Einstein occupation 1/(e^{hbar omega / kB T} - 1).
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !(temperature > 0.0) {
        return Err(Error::Parameter(format!(
            "thermal_occupation requires omega > 0 and temperature > 0, got ({omega}, {temperature})"
        )));
    }
    Ok(1.0 / (HBAR * omega / (KB * temperature)).exp_m1())
}

/// Self-consistent steady state of the driven chain.
///
/// B1 and B3 depend on the mechanical quadrature offset Q2, which in turn
/// depends on |B1|^2 and |B3|^2; solved by damped fixed-point iteration.
pub fn steady_states(params: &TransducerParams, drives: &DriveConfig) -> Result<SteadyState> {
    params.validate()?;
    solve_steady(params, drives, 10_000, 1e-13)
}

fn cavity_amplitude(e: C64, kappa: f64, detuning: f64) -> C64 {
    -C64::i() * e / C64::new(kappa / 2.0, detuning)
}

fn solve_steady(
    params: &TransducerParams,
    drives: &DriveConfig,
    max_iters: usize,
    tol: f64,
) -> Result<SteadyState> {
    let mut q2 = 0.0;
    let mut last_residual = f64::INFINITY;
    for iters in 0..max_iters {
        let b1 = cavity_amplitude(drives.e1, params.kappa1, drives.delta1 - params.g1_max * q2);
        let b3 = cavity_amplitude(drives.e3, params.kappa3, drives.delta3 - params.g3_max * q2);
        let numerator = C64::i()
            * (params.g1_max * b1.norm_sqr() + params.g3_max * b3.norm_sqr())
            / 2f64.sqrt();
        let b2 = numerator / C64::new(params.gamma / 2.0, params.omega2);
        let q2_new = 2f64.sqrt() * b2.re;

        let scale = q2_new.abs().max(q2.abs()).max(1.0);
        last_residual = (q2_new - q2).abs() / scale;
        // Relaxation 0.5 keeps the radiation-pressure feedback loop stable.
        q2 = 0.5 * q2 + 0.5 * q2_new;
        if last_residual < tol {
            let b1 = cavity_amplitude(drives.e1, params.kappa1, drives.delta1 - params.g1_max * q2);
            let b3 = cavity_amplitude(drives.e3, params.kappa3, drives.delta3 - params.g3_max * q2);
            let numerator = C64::i()
                * (params.g1_max * b1.norm_sqr() + params.g3_max * b3.norm_sqr())
                / 2f64.sqrt();
            let b2 = numerator / C64::new(params.gamma / 2.0, params.omega2);
            let _ = iters;
            return Ok(SteadyState {
                b1,
                b2,
                b3,
                q2: 2f64.sqrt() * b2.re,
            });
        }
    }
    Err(Error::Convergence {
        iters: max_iters,
        residual: last_residual,
    })
}

impl DriveConfig {
    /// Detunings auto-set so that Delta_j - g_j Q2 = omega2, with a damped
    /// fixed-point loop since Q2 itself depends on the detunings.
    pub fn auto_tuned(params: &TransducerParams, e1: C64, e3: C64) -> Result<Self> {
        params.validate()?;
        let mut drives = DriveConfig {
            e1,
            e3,
            delta1: params.omega2,
            delta3: params.omega2,
        };
        for _ in 0..10_000 {
            let ss = solve_steady(params, &drives, 10_000, 1e-13)?;
            let d1 = params.omega2 + params.g1_max * ss.q2;
            let d3 = params.omega2 + params.g3_max * ss.q2;
            let residual = ((d1 - drives.delta1).abs() + (d3 - drives.delta3).abs())
                / params.omega2;
            drives.delta1 = 0.5 * drives.delta1 + 0.5 * d1;
            drives.delta3 = 0.5 * drives.delta3 + 0.5 * d3;
            if residual < 1e-13 {
                drives.delta1 = d1;
                drives.delta3 = d3;
                return Ok(drives);
            }
        }
        Err(Error::Convergence {
            iters: 10_000,
            residual: f64::NAN,
        })
    }
}

/// Residual of the steady-state fixed-point relations, for verification.
pub fn steady_state_residual(
    params: &TransducerParams,
    drives: &DriveConfig,
    ss: &SteadyState,
) -> f64 {
    let b1 = cavity_amplitude(drives.e1, params.kappa1, drives.delta1 - params.g1_max * ss.q2);
    let b3 = cavity_amplitude(drives.e3, params.kappa3, drives.delta3 - params.g3_max * ss.q2);
    let numerator =
        C64::i() * (params.g1_max * b1.norm_sqr() + params.g3_max * b3.norm_sqr()) / 2f64.sqrt();
    let b2 = numerator / C64::new(params.gamma / 2.0, params.omega2);
    let scale = ss.b1.norm().max(ss.b2.norm()).max(ss.b3.norm()).max(1.0);
    ((b1 - ss.b1).norm() + (b2 - ss.b2).norm() + (b3 - ss.b3).norm()) / scale
}

/// Attenuation and heating of the full sequential-swap transfer for a given
/// initial mechanical occupation `nbar0`.
pub fn transduction_channel(params: &TransducerParams, nbar0: f64) -> Result<TransductionChannel> {
    params.validate()?;
    if !(nbar0 >= 0.0) {
        return Err(Error::Parameter(format!(
            "initial mechanical occupation must be >= 0, got {nbar0}"
        )));
    }
    let nbar = params.reservoir_occupation()?;

    let tau1 = std::f64::consts::PI / (2.0 * params.g1_lin_max);
    let tau3 = std::f64::consts::PI / (2.0 * params.g3_lin_max);
    let theta1 = (params.kappa1 + params.gamma) / 2.0;
    let theta3 = (params.kappa3 + params.gamma) / 2.0;
    let nu1 = (params.kappa1 - params.gamma) * (2.0 * nbar0 + 1.0).sqrt()
        / (4.0 * params.g1_lin_max);
    let nu3 = (params.kappa3 - params.gamma) / (4.0 * params.g3_lin_max);
    // Cross term in the first-swap integral uses the bare linewidth ratio,
    // without the thermal factor carried by nu1.
    let nu1_bare = (params.kappa1 - params.gamma) / (4.0 * params.g1_lin_max);

    let g1 = params.g1_lin_max;
    let g3 = params.g3_lin_max;
    let abs_tol = 1e-12 * tau1.max(tau3).max(1.0);

    let alpha1 = quad::integrate(
        |t| {
            let c = (g1 * t).cos() + nu1_bare * (g1 * t).sin();
            c * c * (-theta1 * t / 2.0).exp()
        },
        0.0,
        tau1,
        abs_tol,
    )?;
    let beta3 = quad::integrate(
        |t| {
            let c = (g3 * t).cos() - nu3 * (g3 * t).sin();
            c * c * (-theta3 * t / 2.0).exp()
        },
        0.0,
        tau3,
        abs_tol,
    )?;
    let mu1 = quad::integrate(
        |t| (g1 * t).sin().powi(2) * (-params.kappa1 * t).exp(),
        0.0,
        tau1,
        abs_tol,
    )?;
    let mu3 = quad::integrate(
        |t| (g3 * t).sin().powi(2) * (-params.kappa3 * t).exp(),
        0.0,
        tau3,
        abs_tol,
    )?;

    let damping = theta1 * tau1 + theta3 * tau3;
    let eta_tr = (-damping).exp();
    let heating = 2.0 * nbar + 1.0;
    let mut nbar_tr = 0.5
        * ((-damping).exp() * (1.0 + nu1 * nu1)
            + params.kappa3 * beta3
            + params.gamma * heating * mu3
            + (-theta3 * tau3).exp()
                * (nu3 * nu3 + params.kappa1 * mu1 + params.gamma * heating * alpha1)
            - 1.0);
    if nbar_tr < -1e-9 {
        return Err(Error::Numerical(format!(
            "computed nbar_tr = {nbar_tr:.3e} is negative beyond round-off"
        )));
    }
    nbar_tr = nbar_tr.max(0.0);

    Ok(TransductionChannel {
        eta_tr,
        nbar_tr,
        tau1,
        tau3,
    })
}

/// Transduction channel with the mechanical oscillator initially in thermal
/// equilibrium with its reservoir (nbar0 = nbar).
pub fn transduction_channel_equilibrium(params: &TransducerParams) -> Result<TransductionChannel> {
    let nbar0 = params.reservoir_occupation()?;
    transduction_channel(params, nbar0)
}

/// Input efficiency of loading a unit-energy square pulse of width
/// `pulse_width` into a cavity of linewidth `kappa1`:
/// 2 (1 - e^{-kappa1 T / 2}) / sqrt(kappa1 T).
pub fn insertion_efficiency(kappa1: f64, pulse_width: f64) -> Result<f64> {
    if !(kappa1 > 0.0) || !(pulse_width > 0.0) {
        return Err(Error::Parameter(format!(
            "insertion_efficiency requires positive inputs, got ({kappa1}, {pulse_width})"
        )));
    }
    let x = kappa1 * pulse_width;
    Ok(2.0 * (-(-x / 2.0).exp_m1()) / x.sqrt())
}
