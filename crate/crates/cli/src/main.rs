use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use veesys::builders::build_str;
use veesys::catalog::{build_catalog, verify_known_equivalences, verify_t4_identifications, Group};
use veesys::equivalence::equivalent;
use veesys::frobenius::max_wdvv_residual;
use veesys::io::{from_json, parse_covector_list, to_json};
use veesys::restriction::{restrict, restrict_along};
use veesys::veecheck::check_vee;
use veesys::{CovectorSystem, TolerancePolicy, VeeError};

/// Build, check, restrict, compare and catalog vee-systems of covectors.
#[derive(Parser)]
#[command(name = "veesys", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a system from a spec such as "F4:lambda=1" and write it as JSON.
    Build {
        spec: String,
        /// Output file (standard output if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Decide the vee-conditions; exit 0 iff they hold.
    Check {
        path: PathBuf,
        /// Also evaluate the WDVV residual at seeded regular points.
        #[arg(long)]
        wdvv: bool,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Restrict to the intersection of the kernels of a subsystem.
    Restrict {
        path: PathBuf,
        /// Covector literals ("e7-e8,e7+e8") or 0-based covector indices ("0,3").
        #[arg(long)]
        along: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Look for a linear equivalence between two systems; exit 0 iff one exists.
    Equiv { first: PathBuf, second: PathBuf },
    /// Print the corank >= 3 restrictions of E6, E7, E8 or F4 as JSON lines.
    Catalog {
        group: String,
        /// Parameter of F4.
        #[arg(long)]
        lambda: Option<f64>,
        /// Also check the table of known identities (report on standard error).
        #[arg(long)]
        verify: bool,
    },
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<VeeError> for Failure {
    fn from(e: VeeError) -> Self {
        let code = match e {
            VeeError::DegenerateForm { .. }
            | VeeError::IndefiniteForm { .. }
            | VeeError::SingularPoint { .. }
            | VeeError::SamplingExhausted { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn user_error(message: String) -> Failure {
    Failure { code: 2, message }
}

type Outcome = Result<u8, Failure>;

fn read_system(path: &Path, policy: &TolerancePolicy) -> Result<CovectorSystem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| user_error(format!("{}: {e}", path.display())))?;
    from_json(&text, policy.eps_rank).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn write_system(system: &CovectorSystem, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_json(system);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| user_error(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summary(system: &CovectorSystem) -> String {
    format!("{}: dim {}, {} covectors", system.name, system.dim, system.len())
}

fn cmd_build(spec: &str, out: Option<&Path>) -> Outcome {
    let system = build_str(spec)?;
    write_system(&system, out)?;
    eprintln!("{}", summary(&system));
    Ok(0)
}

fn cmd_check(path: &Path, wdvv: bool, points: usize, seed: u64, as_json: bool) -> Outcome {
    let policy = TolerancePolicy::with_seed(seed);
    let system = read_system(path, &policy)?;
    let report = check_vee(&system, &policy)?;
    let wdvv_max = if wdvv {
        Some(max_wdvv_residual(&system, points, &policy)?)
    } else {
        None
    };
    if as_json {
        let mut value = serde_json::to_value(&report).expect("reports serialize");
        value["name"] = json!(system.name);
        if let Some(w) = wdvv_max {
            value["wdvv"] = json!({"max_residual": w, "points": points, "seed": seed});
        }
        println!("{value}");
    } else {
        println!(
            "{}: {} ({} planes, max residual {:.3e}, Gram condition number {:.3e})",
            summary(&system),
            if report.is_vee { "vee-system" } else { "NOT a vee-system" },
            report.plane_count,
            report.max_residual,
            report.gram_condition_number
        );
        for v in &report.violations {
            println!(
                "  violating plane {:?}: covector {} has residual {:.3e}",
                v.plane, v.alpha, v.residual
            );
        }
        if let Some(w) = wdvv_max {
            println!("  WDVV: max residual {w:.3e} over {points} points (seed {seed})");
        }
    }
    Ok(if report.is_vee { 0 } else { 1 })
}

fn cmd_restrict(path: &Path, along: &str, out: Option<&Path>) -> Outcome {
    let policy = TolerancePolicy::default();
    let system = read_system(path, &policy)?;
    let tokens: Vec<&str> = along.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let indices: Option<Vec<usize>> = tokens.iter().map(|t| t.parse().ok()).collect();
    let res = match indices {
        Some(idx) if !idx.is_empty() => restrict(&system, &idx, &policy)?,
        _ => restrict_along(&system, &parse_covector_list(along, &system)?, &policy)?,
    };
    write_system(&res.system, out)?;
    eprintln!("subsystem: {:?}", res.subsystem);
    for g in res.merges() {
        let scalars: Vec<String> = g.source_scalars.iter().map(|s| format!("{s:.6}")).collect();
        eprintln!(
            "merged {:?} (lengths {}) into one covector of length {:.6}",
            g.sources,
            scalars.join(", "),
            g.merged_scalar
        );
    }
    eprintln!("{}", summary(&res.system));
    Ok(0)
}

fn cmd_equiv(first: &Path, second: &Path) -> Outcome {
    let policy = TolerancePolicy::default();
    let a = read_system(first, &policy)?;
    let b = read_system(second, &policy)?;
    match equivalent(&a, &b, &policy)? {
        Some(cert) => {
            println!("{}", serde_json::to_string(&cert).expect("certificates serialize"));
            Ok(0)
        }
        None => {
            println!("not equivalent");
            Ok(1)
        }
    }
}

fn cmd_catalog(group: &str, lambda: Option<f64>, verify: bool) -> Outcome {
    let policy = TolerancePolicy::default();
    let group: Group = group.parse()?;
    let entries = build_catalog(group, lambda, &policy)?;
    let mut ok = true;
    for e in &entries {
        println!("{}", e.to_json_line());
        if !e.is_vee {
            ok = false;
            eprintln!("[FAIL] {} is not a vee-system", e.parabolic.subtype_label);
        }
    }
    if verify {
        for report in [verify_known_equivalences(&policy)?, verify_t4_identifications(&policy)?] {
            eprint!("{report}");
            ok &= report.all_passed();
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // the catalog builds many comparison systems internally; their construction
    // warnings are noise for the user
    let level = if matches!(cli.command, Command::Catalog { .. }) { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match &cli.command {
        Command::Build { spec, out } => cmd_build(spec, out.as_deref()),
        Command::Check {
            path,
            wdvv,
            points,
            seed,
            json,
        } => cmd_check(path, *wdvv, *points, *seed, *json),
        Command::Restrict { path, along, out } => cmd_restrict(path, along, out.as_deref()),
        Command::Equiv { first, second } => cmd_equiv(first, second),
        Command::Catalog { group, lambda, verify } => cmd_catalog(group, *lambda, *verify),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
