//! Command bodies. Each returns the primary output as a string; callers
//! decide where it goes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use kakeya_core::bounds::{alpha_root, bound_table};
use kakeya_core::dist::{CoordSet, JointDist, ShearerReport};
use kakeya_core::ratios::Functional;
use kakeya_core::rset::RSet;
use kakeya_core::search::{search_lower_bound, SearchConfig};
use kakeya_core::verify::run_suite;

use crate::manifest;
use crate::{Cli, CmdError, Command, Execution, OutputFormat};

pub fn execute(cli: &Cli) -> Result<Execution, CmdError> {
    match &cli.command {
        Command::Entropy { dist } => cmd_entropy(cli, dist),
        Command::BetaSearch {
            rset,
            rset_file,
            config,
            functional,
        } => cmd_beta_search(cli, rset.as_deref(), rset_file.as_deref(), config.as_deref(), functional),
        Command::BoundTable { beta, d_max } => cmd_bound_table(cli, beta, *d_max),
        Command::Verify { suite, p_cap } => cmd_verify(cli, suite, *p_cap),
        Command::Replay { manifest } => cmd_replay(manifest),
    }
}

// --- entropy ---------------------------------------------------------------

#[derive(Serialize)]
struct ConditionalRow {
    a: usize,
    b: usize,
    value: f64,
}

#[derive(Serialize)]
struct EntropyReport {
    dim: usize,
    atoms: usize,
    entropy: f64,
    pairwise_conditional: Vec<ConditionalRow>,
    /// Cover check over the all-(d-1)-subsets family with t = d-1; absent
    /// for one-dimensional distributions.
    shearer: Option<ShearerReport>,
}

fn cmd_entropy(cli: &Cli, path: &Path) -> Result<Execution, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let dist: JointDist = serde_json::from_str(&text)
        .map_err(|e| CmdError::Usage(format!("malformed distribution {}: {e}", path.display())))?;

    let dim = dist.dim();
    let mut pairwise = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                let value = dist.cond_entropy(&CoordSet::new([a]), &CoordSet::new([b]))?;
                pairwise.push(ConditionalRow { a, b, value });
            }
        }
    }

    let shearer = if dim >= 2 {
        let family: Vec<CoordSet> = (0..dim)
            .map(|skip| CoordSet::new((0..dim).filter(|&c| c != skip)))
            .collect();
        Some(dist.shearer_check(&family, dim - 1)?)
    } else {
        None
    };

    let report = EntropyReport {
        dim,
        atoms: dist.num_atoms(),
        entropy: dist.entropy(),
        pairwise_conditional: pairwise,
        shearer,
    };

    if cli.verbose {
        eprintln!("H = {:.6} bits over {} atoms (dim {dim})", report.entropy, report.atoms);
        for row in &report.pairwise_conditional {
            eprintln!("H(X{} | X{}) = {:.6}", row.a, row.b, row.value);
        }
        if let Some(s) = &report.shearer {
            eprintln!(
                "shearer all-(d-1)-subsets: lhs {:.6} <= rhs {:.6}: {}",
                s.lhs, s.rhs, s.holds
            );
        }
    }

    let primary = match cli.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => pretty_json(&report)?,
        OutputFormat::Csv => {
            let mut out = String::from("quantity,a,b,value\n");
            let _ = writeln!(out, "entropy,,,{}", report.entropy);
            for row in &report.pairwise_conditional {
                let _ = writeln!(out, "conditional,{},{},{}", row.a, row.b, row.value);
            }
            if let Some(s) = &report.shearer {
                let _ = writeln!(out, "shearer_lhs,,,{}", s.lhs);
                let _ = writeln!(out, "shearer_rhs,,,{}", s.rhs);
                let _ = writeln!(out, "shearer_holds,,,{}", s.holds);
            }
            out
        }
    };
    Ok(Execution::ok(primary))
}

// --- beta-search -----------------------------------------------------------

fn parse_functional(name: &str) -> Result<Functional, CmdError> {
    match name {
        "kakeya" => Ok(Functional::Kakeya),
        "homogeneous" => Ok(Functional::Homogeneous),
        "gap" => Ok(Functional::Gap),
        other => Err(CmdError::Usage(format!(
            "unknown functional {other:?} (expected kakeya, homogeneous, or gap)"
        ))),
    }
}

fn parse_rset(inline: Option<&str>, file: Option<&Path>) -> Result<RSet, CmdError> {
    match (inline, file) {
        (Some(text), None) => {
            let values: Result<Vec<_>, _> = text
                .split(',')
                .map(|tok| tok.trim().parse::<kakeya_core::Rat>())
                .collect();
            let values = values.map_err(|e| CmdError::Usage(format!("bad direction set: {e}")))?;
            Ok(RSet::scalars(values)?)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CmdError::Usage(format!("malformed direction set: {e}")))
        }
        _ => Err(CmdError::Usage(
            "provide a direction set with --rset or --rset-file".into(),
        )),
    }
}

fn cmd_beta_search(
    cli: &Cli,
    rset_inline: Option<&str>,
    rset_file: Option<&Path>,
    config: Option<&Path>,
    functional: &str,
) -> Result<Execution, CmdError> {
    let functional = parse_functional(functional)?;
    let rset = parse_rset(rset_inline, rset_file)?;

    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<SearchConfig>(&text)
                .map_err(|e| CmdError::Usage(format!("malformed config: {e}")))?
        }
        None => {
            let mut base = SearchConfig::default();
            // a gap search needs one extra box coordinate per dimension
            if functional == Functional::Gap {
                base.support_box = vec![(-2, 2); rset.dim() + 1];
            }
            base
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let bound = search_lower_bound(&rset, &cfg, functional)?;

    if cli.verbose {
        eprintln!(
            "best {} ratio {:.6} over {} restarts (seed {})",
            functional.name(),
            bound.value,
            cfg.restarts,
            cfg.seed
        );
    }

    let primary = match cli.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => pretty_json(&bound)?,
        OutputFormat::Csv => {
            let dirs: Vec<String> = rset
                .iter()
                .map(|e| {
                    e.iter()
                        .map(|r| r.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            format!(
                "rset,kind,value,functional,seed\n{};{},lower,{},{},{}\n",
                rset.dim(),
                dirs.join(";"),
                bound.value,
                functional.name(),
                cfg.seed
            )
        }
    };
    Ok(Execution::ok(primary))
}

// --- bound-table -----------------------------------------------------------

fn cmd_bound_table(cli: &Cli, beta: &str, d_max: u32) -> Result<Execution, CmdError> {
    let beta_value = if beta == "alpha" {
        alpha_root().value
    } else {
        beta.parse::<f64>()
            .map_err(|e| CmdError::Usage(format!("bad beta {beta:?}: {e}")))?
    };
    let rows = bound_table(beta_value, d_max)?;

    if cli.verbose {
        for row in &rows {
            eprintln!(
                "d={} beta_out={:.9} mink={:.9} {}",
                row.d, row.beta_out, row.mink_factor, row.note
            );
        }
    }

    // the table is CSV-first; JSON on request
    let primary = match cli.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => pretty_json(&rows)?,
        OutputFormat::Csv => {
            let mut out = String::from("d,beta_in,delta,beta_out,mink_factor,note\n");
            for row in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    row.d, row.beta_in, row.delta, row.beta_out, row.mink_factor, row.note
                );
            }
            out
        }
    };
    Ok(Execution::ok(primary))
}

// --- verify ----------------------------------------------------------------

fn cmd_verify(cli: &Cli, suite: &str, p_cap: u64) -> Result<Execution, CmdError> {
    let seed = cli.seed.unwrap_or(0);
    let results = run_suite(suite, seed, p_cap)?;
    let mut out = String::new();
    let mut failed = 0usize;
    for r in &results {
        if r.passed {
            let _ = writeln!(out, "ok   {} ({})", r.name, r.detail);
        } else {
            failed += 1;
            let _ = writeln!(out, "FAIL {} ({})", r.name, r.detail);
        }
    }
    let _ = writeln!(
        out,
        "verify: {} passed, {} failed (suite {}, seed {}, p-cap {})",
        results.len() - failed,
        failed,
        suite,
        seed,
        p_cap
    );
    Ok(Execution {
        primary: out,
        invariant_failure: failed > 0,
    })
}

// --- replay ----------------------------------------------------------------

fn cmd_replay(path: &Path) -> Result<Execution, CmdError> {
    use clap::Parser;

    let stored = manifest::load(path)?;
    let argv = std::iter::once("kakeya".to_string()).chain(stored.args.iter().cloned());
    let replay_cli = Cli::try_parse_from(argv)
        .map_err(|e| CmdError::Usage(format!("manifest args do not parse: {e}")))?;
    let exec = execute(&replay_cli)?;
    let fresh = manifest::digest(&exec.primary);
    if fresh == stored.output_digest {
        Ok(Execution::ok(format!(
            "replay ok: {} reproduced sha256:{fresh}\n",
            stored.command
        )))
    } else {
        Ok(Execution {
            primary: format!(
                "replay MISMATCH: {} expected sha256:{} got sha256:{fresh}\n",
                stored.command, stored.output_digest
            ),
            invariant_failure: true,
        })
    }
}

// --- shared ----------------------------------------------------------------

fn pretty_json<T: Serialize>(value: &T) -> Result<String, CmdError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CmdError::Usage(format!("serialization failed: {e}")))
}
