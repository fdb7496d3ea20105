use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::attack::{AttackReport, TrialSpec, ATTACK_CSV_HEADER};
use crate::randmat::{gen_matrix, perturbed_matrix, spectral_report, DenseMatrix};
use crate::rng::{derive_seed, stream_seed, Stream};

use super::config::{ExperimentConfig, Family, SpectralConfig, SweepConfig};
use super::{CliError, SCHEMA_LINE};

/// Attack CSV columns: the report schema, then `kind` (`trial` or `summary`) and
/// the min/max Hamming fraction, which only summary rows fill.
pub fn attack_header() -> String {
    format!("{ATTACK_CSV_HEADER},kind,hamming_min,hamming_max")
}

pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<AttackReport>, CliError> {
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| cfg.spec.run(TrialSpec::trial_seed(cfg.master_seed, t)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

/// One row per trial and a closing summary row (mean Hamming fraction and mean
/// `sigma_min`; `seed` holds the master seed).
pub fn attack_rows(cfg: &ExperimentConfig, reports: &[AttackReport]) -> Vec<String> {
    let mut rows: Vec<String> = reports.iter().map(|r| format!("{},trial,,", r.csv_row(cfg.timing))).collect();
    let count = reports.len() as f64;
    let fractions: Vec<f64> = reports.iter().map(|r| r.hamming_fraction).collect();
    let mean = fractions.iter().sum::<f64>() / count;
    let min = fractions.iter().copied().fold(f64::INFINITY, f64::min);
    let max = fractions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sigma = reports.iter().map(|r| r.sigma_min).sum::<f64>() / count;
    let first = &reports[0];
    let wall = if cfg.timing {
        format!("{:.3}", reports.iter().map(|r| r.wall_ms).sum::<f64>())
    } else {
        String::new()
    };
    rows.push(format!(
        "{},{},{},{},{},{},{},{},{mean},{sigma},{wall},summary,{min},{max}",
        first.mechanism,
        first.decoder,
        first.n,
        first.d,
        first.k,
        first.noise.beta(),
        first.noise.gamma(),
        cfg.master_seed,
    ));
    rows
}

pub fn cmd_attack(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let reports = run_trials(cfg)?;
    let mut out = format!("{SCHEMA_LINE}\n{}\n", attack_header());
    for row in attack_rows(cfg, &reports) {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

pub const SPECTRAL_CSV_HEADER: &str = "family,h,d,n,k,seed,sigma_min,op_norm,euclid_ratio,probes";

fn spectral_matrix(cfg: &SpectralConfig, d: usize, n: usize, seed: u64) -> Result<DenseMatrix, CliError> {
    Ok(match cfg.family {
        Family::Identity => DenseMatrix::identity(n),
        Family::Random(spec) => gen_matrix(spec, d, n, seed),
        Family::Perturbed => perturbed_matrix(d, n, cfg.rank1_scale, seed),
        Family::RowFunction => {
            let (_, h) = cfg.h.as_ref().expect("validated: rowfunc has h");
            let t = gen_matrix(cfg.base, d, n, seed);
            let factors = vec![&t; cfg.k];
            h.matrix(&factors)?
        }
    })
}

/// Rows ordered by `d`, then `n`, then seed index; seed `s` is
/// `derive_seed(master_seed, s)` for every shape, so families share draws.
pub fn cmd_spectral(cfg: &SpectralConfig) -> Result<String, CliError> {
    let jobs: Vec<(usize, usize, u64)> = cfg
        .shapes()
        .into_iter()
        .flat_map(|(d, n)| (0..cfg.seeds as u64).map(move |s| (d, n, s)))
        .collect();
    let h_col = match (&cfg.h, cfg.family) {
        (Some((text, _)), _) => text.clone(),
        (None, Family::Perturbed) => format!("rank1_scale={}", cfg.rank1_scale),
        (None, _) => String::new(),
    };
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(d, n, s)| {
            let seed = derive_seed(cfg.master_seed, s);
            let m = spectral_matrix(cfg, d, n, seed)?;
            let r = spectral_report(&m, cfg.probes, stream_seed(seed, Stream::Probe))?;
            Ok(format!(
                "{},{},{d},{n},{},{seed},{},{},{},{}",
                cfg.family_tag, h_col, cfg.k, r.sigma_min, r.op_norm, r.euclid_ratio_min, r.probes_used
            ))
        })
        .collect::<Result<_, CliError>>()?;
    let mut out = format!("{SCHEMA_LINE}\n{SPECTRAL_CSV_HEADER}\n");
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

pub fn sweep_header(cfg: &SweepConfig) -> String {
    let mut cols = vec!["cell".to_string()];
    cols.extend(cfg.grid.iter().map(|(k, _)| format!("grid_{k}")));
    cols.push(attack_header());
    cols.join(",")
}

fn cell_lines(cfg: &SweepConfig, index: usize) -> Result<Vec<String>, CliError> {
    let cell = &cfg.cells[index];
    let reports = run_trials(&cell.config).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("cell {}: {m}", cell.key)),
        CliError::Runtime(m) => CliError::Runtime(format!("cell {}: {m}", cell.key)),
    })?;
    let mut prefix = cell.key.clone();
    for v in &cell.values {
        prefix.push(',');
        prefix.push_str(v);
    }
    Ok(attack_rows(&cell.config, &reports)
        .into_iter()
        .map(|row| format!("{prefix},{row}"))
        .collect())
}

/// Completed cells already present in a previous output, keyed by cell key.
fn completed_cells(path: &Path, header: &str) -> Result<BTreeMap<String, Vec<String>>, CliError> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let file = fs::File::open(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let mut next = || lines.next().transpose().map_err(|e| CliError::Runtime(e.to_string()));
    match next()? {
        None => return Ok(done),
        Some(l) if l.trim() == SCHEMA_LINE => {}
        Some(l) => {
            return Err(CliError::Config(format!(
                "{}: unsupported schema line {l:?}",
                path.display()
            )))
        }
    }
    match next()? {
        None => return Ok(done),
        Some(l) if l == header => {}
        Some(_) => {
            return Err(CliError::Config(format!(
                "{} exists with a different header; refusing to resume into it",
                path.display()
            )))
        }
    }
    let kind_col = header.split(',').count() - 3;
    let mut partial: BTreeMap<String, Vec<String>> = BTreeMap::new();
    while let Some(line) = next()? {
        let key = line.split(',').next().unwrap_or_default().to_string();
        let is_summary = line.split(',').nth(kind_col) == Some("summary");
        let entry = partial.entry(key.clone()).or_default();
        entry.push(line);
        if is_summary {
            done.insert(key.clone(), partial.remove(&key).expect("just inserted"));
        }
    }
    Ok(done)
}

/// Runs every grid cell not already completed in the output file. Rows are written
/// in cell order as soon as the leading cells are finished, so an interrupted sweep
/// can be resumed from the same output path.
pub fn cmd_sweep(cfg: &SweepConfig, out: Option<&Path>, stdout: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let header = sweep_header(cfg);
    let mut done = match out {
        Some(p) => completed_cells(p, &header)?,
        None => BTreeMap::new(),
    };
    let pending: Vec<usize> = (0..cfg.cells.len())
        .filter(|&i| !done.contains_key(&cfg.cells[i].key))
        .collect();
    if !done.is_empty() {
        log::info!("resuming: {} of {} cells already complete", cfg.cells.len() - pending.len(), cfg.cells.len());
    }
    let mut file;
    let sink: &mut (dyn Write + Send) = match out {
        Some(p) => {
            file = fs::File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            &mut file
        }
        None => stdout,
    };
    writeln!(sink, "{SCHEMA_LINE}\n{header}")?;

    let (tx, rx) = mpsc::channel::<(usize, Result<Vec<String>, CliError>)>();
    std::thread::scope(|scope| -> Result<(), CliError> {
        // the writer runs beside the pool so cells are computed on the caller's workers
        let writer = scope.spawn(move || -> Result<(), CliError> {
            let mut ready: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            let mut next = 0usize;
            let mut failure = None;
            let mut flush = |ready: &mut BTreeMap<usize, Vec<String>>| -> Result<(), CliError> {
                while next < cfg.cells.len() {
                    let lines = match done.remove(&cfg.cells[next].key) {
                        Some(lines) => lines,
                        None => match ready.remove(&next) {
                            Some(lines) => lines,
                            None => break,
                        },
                    };
                    for l in lines {
                        writeln!(sink, "{l}")?;
                    }
                    next += 1;
                }
                sink.flush()?;
                Ok(())
            };
            flush(&mut ready)?;
            for (i, result) in rx {
                match result {
                    Ok(lines) if failure.is_none() => {
                        ready.insert(i, lines);
                        flush(&mut ready)?;
                    }
                    Ok(_) => {}
                    Err(e) => {
                        failure.get_or_insert(e);
                    }
                }
            }
            match failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        });
        pending.par_iter().for_each_with(tx, |tx, &i| {
            let _ = tx.send((i, cell_lines(cfg, i)));
        });
        writer.join().expect("sweep writer panicked")
    })
}
