//! Command-line front end: solvers, verification, brute-force baselines and
//! instance generators, with machine-readable output and stable exit codes.
//!
//! Exit codes: 0 on success, 2 when the answer is a proof of absence (no
//! strongly stable matching, or infeasible forced edges), 1 on usage, parse
//! or precondition errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hrht::forced_edges::FeOutcome;
use hrht::instance::serialize_matching;
use hrht::oracle::{FeasibilityMode, OracleConfig, OracleVerdict};
use hrht::reductions::{GadgetOutput, RandomParams};
use hrht::stability::{blocking_pairs, BlockingNotion, Witness};
use hrht::{ForcedEdges, Instance};

#[derive(Parser)]
#[command(name = "hrht", version, about = "Capacity augmentation for strongly stable matching")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find a resident-optimal strongly stable matching or print NO-SSM.
    Check {
        /// Instance file in the HRHT v1 format.
        file: PathBuf,
    },
    /// List the blocking pairs of a matching.
    Verify {
        /// Instance file in the HRHT v1 format.
        file: PathBuf,
        /// Matching file (quota lines, then match/unmatched lines).
        #[arg(long)]
        matching: PathBuf,
        /// Blocking notion to test.
        #[arg(long, value_enum, default_value_t = NotionArg::Strong)]
        notion: NotionArg,
    },
    /// Minimise the total quota increase until a strongly stable matching
    /// exists.
    Minsum {
        /// Instance file in the HRHT v1 format.
        file: PathBuf,
    },
    /// Minimum total increase subject to the instance's forced pairs.
    MinsumFe {
        /// Instance file with `forced:` lines.
        file: PathBuf,
    },
    /// Augment every quota by at most a budget, maximising resident welfare.
    MinmaxBt {
        /// Instance file in the HRHT v1 format.
        file: PathBuf,
        /// Per-hospital increase budget; ties may be at most one longer.
        #[arg(long)]
        ell: u32,
    },
    /// Brute-force baselines: exhaustive optima with all witnesses.
    Oracle {
        /// What to optimise or enumerate.
        query: QueryArg,
        /// Instance file in the HRHT v1 format.
        file: PathBuf,
        /// Exhaustive matching enumeration is refused above this edge count.
        #[arg(long, default_value_t = 16)]
        cap_edges: usize,
        /// Feasibility decision procedure.
        #[arg(long, value_enum, default_value_t = ModeArg::Independent)]
        mode: ModeArg,
    },
    /// Instance generators.
    #[command(subcommand)]
    Gen(GenCmd),
}

#[derive(Subcommand)]
enum GenCmd {
    /// Translate a monotone 3-SAT formula into a gadget instance.
    Reduction(ReductionArgs),
    /// Seeded pseudo-random instance.
    Random(RandomArgs),
}

#[derive(Args)]
struct ReductionArgs {
    /// Which hardness gadget to build.
    #[arg(long = "type", value_enum)]
    kind: ReductionKind,
    /// Formula file in the `mono3sat` format.
    #[arg(long)]
    sat: PathBuf,
    /// Give every padding resident a private last-resort hospital
    /// (capacity gadget only).
    #[arg(long)]
    resident_perfect: bool,
    /// Write the instance here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    residents: u32,
    #[arg(long)]
    hospitals: u32,
    /// Probability of each resident-hospital pair being acceptable.
    #[arg(long)]
    density: f64,
    /// Largest tie length in hospital lists.
    #[arg(long, default_value_t = 1)]
    max_tie: u32,
    /// Quotas are drawn uniformly from 1..=quota-max.
    #[arg(long, default_value_t = 1)]
    quota_max: u32,
    #[arg(long)]
    seed: u64,
    /// Write the instance here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NotionArg {
    Strong,
    Super,
    Weak,
}

impl From<NotionArg> for BlockingNotion {
    fn from(n: NotionArg) -> Self {
        match n {
            NotionArg::Strong => BlockingNotion::Strong,
            NotionArg::Super => BlockingNotion::Super,
            NotionArg::Weak => BlockingNotion::Weak,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryArg {
    Minsum,
    MinsumFe,
    MinEll,
    MinCost,
    SsmAll,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Independent,
    Fast,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionKind {
    /// Weighted gadget from one-in-three satisfiability.
    #[value(name = "1in3")]
    OneInThree,
    /// Capacity-1-or-2 gadget from not-all-equal satisfiability.
    Nae,
}

/// Answer that is a proof of absence rather than an error.
const EXIT_NEGATIVE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.cmd {
        Cmd::Check { file } => {
            let inst = load_instance(&file)?;
            match hrht::solve_strong(&inst, &inst.quota_vector()) {
                Some(m) => {
                    print!("{}", serialize_matching(&inst, &inst.quota_vector(), &m));
                    Ok(0)
                }
                None => {
                    println!("NO-SSM");
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Cmd::Verify { file, matching, notion } => {
            let inst = load_instance(&file)?;
            // Solver outputs append a summary trailer after the matching;
            // skip it so solver output pipes straight back in.
            let text: String = read(&matching)?
                .lines()
                .filter(|l| {
                    let head = l.split_whitespace().next();
                    head != Some("total-increase") && head != Some("max-increase")
                })
                .map(|l| format!("{l}\n"))
                .collect();
            let (quotas, m) = hrht::parse_matching(&inst, &text)
                .map_err(|e| format!("{}: {e}", matching.display()))?;
            let report = blocking_pairs(&inst, &quotas, &m, notion.into())
                .map_err(|e| format!("{}: {e}", matching.display()))?;
            println!("blocking-pairs {}", report.pairs.len());
            for p in &report.pairs {
                let witness = match p.witness {
                    Witness::Displaced(r) => format!("displaced {}", inst.resident_name(r)),
                    Witness::EmptySlot => "empty-slot".to_string(),
                };
                println!(
                    "block {} {} {witness}",
                    inst.resident_name(p.resident),
                    inst.hospital_name(p.hospital),
                );
            }
            Ok(0)
        }
        Cmd::Minsum { file } => {
            let inst = load_instance(&file)?;
            let sol = hrht::minsum_augment(&inst);
            print!("{}", serialize_matching(&inst, &sol.quotas, &sol.matching));
            println!("total-increase {}", sol.total_increase);
            Ok(0)
        }
        Cmd::MinsumFe { file } => {
            let inst = load_instance(&file)?;
            let forced = ForcedEdges::new(&inst, inst.forced_pairs().to_vec())
                .map_err(|e| e.to_string())?;
            match hrht::minsum_fe(&inst, &forced).map_err(|e| e.to_string())? {
                FeOutcome::Solution(sol) => {
                    print!("{}", serialize_matching(&inst, &sol.quotas, &sol.matching));
                    println!("total-increase {}", sol.total_increase);
                    Ok(0)
                }
                FeOutcome::Infeasible(reason) => {
                    println!("INFEASIBLE: {reason}");
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Cmd::MinmaxBt { file, ell } => {
            let inst = load_instance(&file)?;
            let sol = hrht::minmax_bt(&inst, ell).map_err(|e| e.to_string())?;
            print!("{}", serialize_matching(&inst, &sol.quotas, &sol.matching));
            println!("max-increase {}", sol.max_increase);
            Ok(0)
        }
        Cmd::Oracle { query, file, cap_edges, mode } => {
            let inst = load_instance(&file)?;
            let cfg = OracleConfig {
                cap_edges,
                mode: match mode {
                    ModeArg::Independent => FeasibilityMode::Independent,
                    ModeArg::Fast => FeasibilityMode::Fast,
                },
                ..OracleConfig::default()
            };
            let verdict = match query {
                QueryArg::Minsum => hrht::brute_minsum(&inst, &cfg),
                QueryArg::MinsumFe => {
                    let forced = ForcedEdges::new(&inst, inst.forced_pairs().to_vec())
                        .map_err(|e| e.to_string())?;
                    hrht::brute_minsum_fe(&inst, &forced, &cfg)
                }
                QueryArg::MinEll => hrht::brute_min_ell(&inst, &cfg),
                QueryArg::MinCost => hrht::brute_min_cost(&inst, &inst.costs_or(1), &cfg),
                QueryArg::SsmAll => hrht::brute_ssm_all(&inst, &cfg),
            }
            .map_err(|e| e.to_string())?;
            print!("{}", render_verdict(&inst, &verdict));
            Ok(0)
        }
        Cmd::Gen(GenCmd::Reduction(args)) => {
            let text = read(&args.sat)?;
            let formula = hrht::parse_sat(&text)
                .map_err(|e| format!("{}: {e}", args.sat.display()))?;
            let gadget = match args.kind {
                ReductionKind::OneInThree => {
                    if args.resident_perfect {
                        return Err("--resident-perfect applies only to --type nae".into());
                    }
                    hrht::gen_mincost_instance(&formula).map_err(|e| e.to_string())?
                }
                ReductionKind::Nae => {
                    hrht::gen_cap12_instance(&formula, args.resident_perfect)
                        .map_err(|e| e.to_string())?
                }
            };
            emit(args.out.as_deref(), &render_gadget(&gadget))
        }
        Cmd::Gen(GenCmd::Random(args)) => {
            let inst = hrht::gen_random_instance(&RandomParams {
                residents: args.residents,
                hospitals: args.hospitals,
                density: args.density,
                max_tie: args.max_tie,
                quota_max: args.quota_max,
                seed: args.seed,
            });
            emit(args.out.as_deref(), &hrht::serialize_instance(&inst))
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, String> {
    let text = read(path)?;
    hrht::parse_instance(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<u8, String> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn render_verdict(inst: &Instance, v: &OracleVerdict) -> String {
    let mut out = String::new();
    match v.optimum {
        Some(x) => writeln!(out, "optimum {x}").unwrap(),
        None => writeln!(out, "optimum none").unwrap(),
    }
    writeln!(out, "checks {}", v.feasibility_checks).unwrap();
    writeln!(out, "mode {}", if v.independent { "independent" } else { "fast" }).unwrap();
    writeln!(out, "witnesses {}", v.witnesses.len()).unwrap();
    for (i, w) in v.witnesses.iter().enumerate() {
        for (j, m) in w.matchings.iter().enumerate() {
            writeln!(out, "\n# witness {} matching {}", i + 1, j + 1).unwrap();
            out.push_str(&serialize_matching(inst, &w.quotas, m));
        }
    }
    out
}

/// Instance text followed by the structural certificates as comments, so
/// gadget files stay valid inputs for every other subcommand.
fn render_gadget(g: &GadgetOutput) -> String {
    let inst = &g.instance;
    let mut out = hrht::serialize_instance(inst);
    let group = |names: Vec<String>| -> String {
        if names.len() == 1 {
            names.into_iter().next().unwrap()
        } else {
            format!("({})", names.join(" "))
        }
    };
    if let Some(master) = &g.hospital_master_list {
        let rendered: Vec<String> = master
            .iter()
            .map(|tie| group(tie.iter().map(|&h| inst.hospital_name(h).to_string()).collect()))
            .collect();
        let _ = writeln!(out, "# hospital-master: {}", rendered.join(" "));
    }
    if let Some(master) = &g.resident_master_list {
        let rendered: Vec<String> = master
            .iter()
            .map(|tie| group(tie.iter().map(|&r| inst.resident_name(r).to_string()).collect()))
            .collect();
        let _ = writeln!(out, "# resident-master: {}", rendered.join(" "));
    }
    if let Some(axis) = &g.single_peaked_axis {
        let rendered: Vec<&str> = axis.iter().map(|&h| inst.hospital_name(h)).collect();
        let _ = writeln!(out, "# axis: {}", rendered.join(" "));
    }
    out
}
