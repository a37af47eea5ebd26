//! Subcommand implementations: each writes a versioned CSV table (plus a run
//! manifest) and prints a short summary to stdout.

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use jdr_core::decoder::{decode_error, DecoderKind, Solution};
use jdr_core::jc::JcConfig;
use jdr_core::physmodel::{transduction_channel_equilibrium, TransductionChannel};
use jdr_core::qsim::{CircuitLayout, NoiseModel};
use jdr_core::{exec, limits, C64};
use serde::Serialize;

use crate::config::ExperimentConfig;

const SCHEMA_VERSION: u32 = 1;
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

fn row_seed(root: u64, index: usize) -> u64 {
    root.wrapping_add((index as u64).wrapping_mul(SEED_STRIDE))
}

fn fnum(v: f64) -> String {
    format!("{v}")
}

/// CSV with a schema-version comment line above the header.
struct Table {
    writer: csv::Writer<File>,
    path: PathBuf,
    rows: usize,
}

impl Table {
    fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut file = File::create(path)
            .with_context(|| format!("cannot create output file {}", path.display()))?;
        writeln!(file, "# schema_version={SCHEMA_VERSION}")?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(Self {
            writer,
            path: path.to_path_buf(),
            rows: 0,
        })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields)?;
        self.rows += 1;
        Ok(())
    }

    fn finish(mut self) -> Result<(PathBuf, usize)> {
        self.writer.flush()?;
        Ok((self.path, self.rows))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    version: &'a str,
    seed: u64,
    config_sha256: String,
    wall_time_s: f64,
    config: &'a ExperimentConfig,
}

fn write_manifest(
    out: &Path,
    command: &str,
    config: &ExperimentConfig,
    started: Instant,
) -> Result<PathBuf> {
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.experiment.seed,
        config_sha256: config.sha256()?,
        wall_time_s: started.elapsed().as_secs_f64(),
        config,
    };
    let path = out.with_extension(format!(
        "{}manifest.toml",
        out.extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    std::fs::write(&path, toml::to_string_pretty(&manifest)?)
        .with_context(|| format!("cannot write manifest {}", path.display()))?;
    Ok(path)
}

fn channel_at(config: &ExperimentConfig, temperature: f64) -> Result<(TransductionChannel, f64)> {
    let params = config.transducer.params(temperature);
    let channel = transduction_channel_equilibrium(&params)?;
    let nbar0 = params.reservoir_occupation()?;
    Ok((channel, nbar0))
}

pub fn channel(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let mut table = Table::create(
        out,
        &["temperature", "eta_tr", "nbar_tr", "tau1", "tau3", "nbar0"],
    )?;
    for &t in &config.experiment.temperatures {
        let (ch, nbar0) = channel_at(config, t)?;
        println!(
            "temperature={t} eta_tr={} nbar_tr={} tau1={} tau3={} nbar0={}",
            ch.eta_tr, ch.nbar_tr, ch.tau1, ch.tau3, nbar0
        );
        table.row(&[
            fnum(t),
            fnum(ch.eta_tr),
            fnum(ch.nbar_tr),
            fnum(ch.tau1),
            fnum(ch.tau3),
            fnum(nbar0),
        ])?;
    }
    let (path, rows) = table.finish()?;
    let manifest = write_manifest(out, "channel", config, started)?;
    println!("wrote {rows} rows to {} (manifest {})", path.display(), manifest.display());
    Ok(())
}

pub fn qubits(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let rmpn = config.train.rmpn;
    let cfg = JcConfig::discrimination(config.experiment.chi);
    let mut table = Table::create(
        out,
        &[
            "temperature", "rmpn", "t_star", "tau", "bx_plus", "by_plus", "bz_plus",
            "bx_minus", "by_minus", "bz_minus",
        ],
    )?;
    for &t in &config.experiment.temperatures {
        let (ch, _) = channel_at(config, t)?;
        let beta = C64::new(rmpn.sqrt(), 0.0);
        let pair = jdr_core::jc::transduce_bpsk(beta, &ch, &cfg)?;
        let bp = pair.rho_plus.bloch_vector()?;
        let bm = pair.rho_minus.bloch_vector()?;
        println!(
            "temperature={t} rmpn={rmpn} t_star={} tau={} bloch_plus=({}, {}, {}) bloch_minus=({}, {}, {})",
            pair.t_star, pair.tau, bp[0], bp[1], bp[2], bm[0], bm[1], bm[2]
        );
        table.row(&[
            fnum(t),
            fnum(rmpn),
            fnum(pair.t_star),
            fnum(pair.tau),
            fnum(bp[0]),
            fnum(bp[1]),
            fnum(bp[2]),
            fnum(bm[0]),
            fnum(bm[1]),
            fnum(bm[2]),
        ])?;
    }
    let (path, rows) = table.finish()?;
    let manifest = write_manifest(out, "qubits", config, started)?;
    println!("wrote {rows} rows to {} (manifest {})", path.display(), manifest.display());
    Ok(())
}

/// Persisted trained-model artifact.
#[derive(Serialize)]
struct ModelArtifact {
    schema_version: u32,
    kind: String,
    n: usize,
    m: usize,
    layers: Option<usize>,
    rmpn: f64,
    temperature: f64,
    j: f64,
    error: f64,
    t_star: f64,
    tau: f64,
    seed: u64,
    converged: bool,
    config_sha256: String,
    angles: Option<Vec<f64>>,
    unitary_re: Option<Vec<Vec<f64>>>,
    unitary_im: Option<Vec<Vec<f64>>>,
}

fn decoder_kinds(config: &ExperimentConfig) -> Result<Vec<(String, DecoderKind)>> {
    let mut kinds = Vec::new();
    for &l in &config.circuit.layers {
        kinds.push((
            l.to_string(),
            DecoderKind::Circuit(CircuitLayout::nearest_neighbor(config.codebook.n, l)?),
        ));
    }
    if config.circuit.include_unitary {
        kinds.push(("U".to_string(), DecoderKind::Unitary));
    }
    Ok(kinds)
}

pub fn train(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let temperature = config.experiment.temperatures[0];
    let (ch, _) = channel_at(config, temperature)?;
    let book = config.codebook.build()?;
    let cfg = JcConfig::discrimination(config.experiment.chi);
    let (label, kind) = decoder_kinds(config)?.into_iter().next().expect("validated");
    let seed = config.experiment.seed;
    let opts = config.optimizer.opts(seed);
    let beta = C64::new(config.train.rmpn.sqrt(), 0.0);
    let outcome = decode_error(beta, &ch, &book, &kind, &NoiseModel::noiseless(), &cfg, &opts)?;

    let (angles, unitary_re, unitary_im) = match &outcome.result.solution {
        Solution::Angles(a) => (Some(a.clone()), None, None),
        Solution::Unitary(u) => {
            let re = u.row_iter().map(|r| r.iter().map(|c| c.re).collect()).collect();
            let im = u.row_iter().map(|r| r.iter().map(|c| c.im).collect()).collect();
            (None, Some(re), Some(im))
        }
    };
    let artifact = ModelArtifact {
        schema_version: SCHEMA_VERSION,
        kind: if label == "U" { "unitary".into() } else { "circuit".into() },
        n: book.n(),
        m: book.m(),
        layers: label.parse::<usize>().ok(),
        rmpn: config.train.rmpn,
        temperature,
        j: outcome.result.j,
        error: outcome.result.error,
        t_star: outcome.t_star,
        tau: outcome.tau,
        seed,
        converged: outcome.result.converged,
        config_sha256: config.sha256()?,
        angles,
        unitary_re,
        unitary_im,
    };
    std::fs::write(out, toml::to_string_pretty(&artifact)?)
        .with_context(|| format!("cannot write model artifact {}", out.display()))?;
    let manifest = write_manifest(out, "train", config, started)?;
    println!(
        "trained decoder ({label}) at rmpn={} T={temperature}: J={}, 1-J={}; model {} (manifest {})",
        config.train.rmpn,
        outcome.result.j,
        outcome.result.error,
        out.display(),
        manifest.display()
    );
    Ok(())
}

struct SweepRow {
    rmpn: f64,
    temperature: f64,
    label: String,
    seed: u64,
    outcome: jdr_core::Result<(f64, f64, f64, f64, f64)>, // p_err, helstrom_n, tau, t_star, j
}

fn sweep_rows(config: &ExperimentConfig, noise: &NoiseModel) -> Result<Vec<SweepRow>> {
    let book = config.codebook.build()?;
    let cfg = JcConfig::discrimination(config.experiment.chi);
    let grid = config.experiment.rmpn.values()?;
    let kinds = decoder_kinds(config)?;
    let root = config.experiment.seed;

    let mut tasks = Vec::new();
    for &t in &config.experiment.temperatures {
        for (label, kind) in &kinds {
            for &r in &grid {
                tasks.push((t, label.clone(), kind.clone(), r));
            }
        }
    }
    Ok(exec::map_indexed(tasks, |idx, (t, label, kind, rmpn)| {
        let seed = row_seed(root, idx);
        let outcome = (|| {
            let params = config.transducer.params(t);
            let ch = transduction_channel_equilibrium(&params)?;
            let opts = config.optimizer.opts(seed);
            let beta = C64::new(rmpn.sqrt(), 0.0);
            let out = decode_error(beta, &ch, &book, &kind, noise, &cfg, &opts)?;
            let bound = limits::n_helstrom(rmpn, book.n())?;
            Ok((out.error, bound, out.tau, out.t_star, out.j_noisy))
        })();
        SweepRow {
            rmpn,
            temperature: t,
            label,
            seed,
            outcome,
        }
    }))
}

const SWEEP_HEADER: &[&str] = &[
    "rmpn", "temperature", "n", "m", "l", "p_err", "p_n_helstrom", "tau", "t_star", "j",
    "seed", "status", "message",
];

fn write_sweep_rows(table: &mut Table, config: &ExperimentConfig, rows: &[SweepRow]) -> Result<usize> {
    let mut failures = 0usize;
    for row in rows {
        let mut fields = vec![
            fnum(row.rmpn),
            fnum(row.temperature),
            config.codebook.n.to_string(),
            config.codebook.m.to_string(),
            row.label.clone(),
        ];
        match &row.outcome {
            Ok((p_err, bound, tau, t_star, j)) => {
                fields.extend([
                    fnum(*p_err),
                    fnum(*bound),
                    fnum(*tau),
                    fnum(*t_star),
                    fnum(*j),
                    row.seed.to_string(),
                    "ok".to_string(),
                    String::new(),
                ]);
            }
            Err(e) => {
                failures += 1;
                fields.extend([
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    row.seed.to_string(),
                    "error".to_string(),
                    e.to_string(),
                ]);
            }
        }
        table.row(&fields)?;
    }
    Ok(failures)
}

pub fn sweep(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let noise = config.noise.model();
    let rows = sweep_rows(config, &noise)?;
    let mut table = Table::create(out, SWEEP_HEADER)?;
    let failures = write_sweep_rows(&mut table, config, &rows)?;
    let (path, n) = table.finish()?;
    let manifest = write_manifest(out, "sweep", config, started)?;
    println!(
        "wrote {n} rows ({failures} failed) to {} (manifest {})",
        path.display(),
        manifest.display()
    );
    Ok(())
}

pub fn capacity(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let temperature = config.experiment.temperatures[0];
    let (ch, _) = channel_at(config, temperature)?;
    let ideal = TransductionChannel::ideal();
    let cfg = JcConfig::capacity(config.experiment.chi);
    let grid = config.experiment.rmpn.values()?;

    let rows: Vec<jdr_core::Result<[f64; 5]>> = exec::map_indexed(grid, |_, rmpn| {
        Ok([
            rmpn,
            limits::c1_capacity(rmpn)?,
            limits::holevo_optical_bpsk(rmpn)?,
            limits::jdr_capacity(rmpn, &ideal, &cfg)?,
            limits::jdr_capacity(rmpn, &ch, &cfg)?,
        ])
    });
    let mut table = Table::create(
        out,
        &["rmpn", "c1", "holevo_optical", "jdr_ideal", "jdr_channel"],
    )?;
    for row in rows {
        let row = row?;
        table.row(&row.map(fnum))?;
    }
    let (path, n) = table.finish()?;
    let manifest = write_manifest(out, "capacity", config, started)?;
    println!("wrote {n} rows to {} (manifest {})", path.display(), manifest.display());
    Ok(())
}

/// Noise robustness: the decoder is trained noise-free, then re-evaluated
/// under the configured noise model.
pub fn noise(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let noisy = config.noise.model();
    let ideal_rows = sweep_rows(config, &NoiseModel::noiseless())?;
    let noisy_rows = sweep_rows(config, &noisy)?;
    let mut table = Table::create(
        out,
        &[
            "rmpn", "temperature", "n", "m", "l", "p_err_ideal", "p_err_noisy",
            "p_n_helstrom", "seed", "status", "message",
        ],
    )?;
    let mut failures = 0usize;
    for (a, b) in ideal_rows.iter().zip(&noisy_rows) {
        let mut fields = vec![
            fnum(a.rmpn),
            fnum(a.temperature),
            config.codebook.n.to_string(),
            config.codebook.m.to_string(),
            a.label.clone(),
        ];
        match (&a.outcome, &b.outcome) {
            (Ok((pe_i, bound, ..)), Ok((pe_n, ..))) => {
                fields.extend([
                    fnum(*pe_i),
                    fnum(*pe_n),
                    fnum(*bound),
                    a.seed.to_string(),
                    "ok".to_string(),
                    String::new(),
                ]);
            }
            (ra, rb) => {
                failures += 1;
                let msg = ra
                    .as_ref()
                    .err()
                    .or(rb.as_ref().err())
                    .map(|e| e.to_string())
                    .unwrap_or_default();
                fields.extend([
                    String::new(),
                    String::new(),
                    String::new(),
                    a.seed.to_string(),
                    "error".to_string(),
                    msg,
                ]);
            }
        }
        table.row(&fields)?;
    }
    let (path, n) = table.finish()?;
    let manifest = write_manifest(out, "noise", config, started)?;
    println!(
        "wrote {n} rows ({failures} failed) to {} (manifest {})",
        path.display(),
        manifest.display()
    );
    Ok(())
}
