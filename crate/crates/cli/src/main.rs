use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use symbidisc::bipoly::{classify_bidisc, classify_gamma, sample_variety, BiPoly, Region};
use symbidisc::decomp::{factor_decompose_pure_truncated, factor_decompose_unitary, orthogonality_check};
use symbidisc::dilation::{build_ta_v0, build_tn_vn, dilation_blocks, check_gamma_dilation_eqs, gamma_isometry_residuals, norm_certificate, verify_compression};
use symbidisc::io::{emit_report, parse_matrix, parse_pair, parse_poly, Check, Format, Report, SampleTable};
use symbidisc::pairs::{classify_pair, fundamental_operator, gamma_distinguished_certificate, AlphaGrid};
use symbidisc::registry::{case_ids, run_example, RegistryConfig};
use symbidisc::spectra_sets::{complete_vn_check, vn_check};
use symbidisc::Error;

#[derive(Parser, Debug)]
#[command(name = "symbidisc", version, about = "Operator pairs on the symmetrized bidisc: classification, dilation and spectral-set checks")]
struct Cli {
    /// Tolerance for classifiers.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Sampling grid size.
    #[arg(long, global = true, default_value_t = 512)]
    grid: usize,
    /// Seed for randomized trials.
    #[arg(long, global = true, env = "SYMBIDISC_SEED", default_value_t = 0)]
    seed: u64,
    /// Truncation level for pure models and (T_n, V_n).
    #[arg(long, global = true, default_value_t = 3)]
    level: usize,
    /// Emit JSON (same as --format json).
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run independent cases concurrently.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum RegionArg {
    Bidisc,
    Gamma,
}

impl From<RegionArg> for Region {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Bidisc => Region::Bidisc,
            RegionArg::Gamma => Region::Gamma,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Γ-contraction, isometry, unitary, purity and strictness flags of a pair.
    ClassifyPair {
        #[arg(long)]
        pair: String,
        /// Candidate annihilators to certify the pair as Γ-distinguished.
        #[arg(long, num_args = 0..)]
        candidates: Vec<String>,
    },
    /// Toral / distinguished verdicts of a polynomial, with sampled points for --format csv.
    ClassifyPoly {
        #[arg(long)]
        poly: String,
        #[arg(long, value_enum, default_value = "gamma")]
        region: RegionArg,
    },
    /// Fundamental operator of a Γ-contraction.
    Fundamental {
        #[arg(long)]
        pair: String,
    },
    /// Minimal Γ-isometric dilation (T_A, V_0) with all residuals.
    Dilate {
        #[arg(long)]
        pair: String,
        /// Largest total degree for the compression check.
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },
    /// Scalar von Neumann check of f on a sampled variety.
    VnCheck {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        f: String,
        #[arg(long)]
        variety: String,
        #[arg(long, value_enum, default_value = "gamma")]
        region: RegionArg,
    },
    /// Matricial von Neumann check with random trials.
    CompleteVnCheck {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        variety: String,
        #[arg(long, value_enum, default_value = "gamma")]
        region: RegionArg,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Scalar polynomials tried before the random trials.
        #[arg(long, num_args = 0..)]
        seeded: Vec<String>,
    },
    /// Factor decomposition of a Γ-unitary pair, or of the pure model of --model F.
    Decompose {
        #[arg(long, conflicts_with = "model")]
        pair: Option<String>,
        /// Matrix F of the model (T_{F*+Fz}, T_z), truncated at --level blocks.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, num_args = 1.., required = true)]
        factors: Vec<String>,
    },
    /// Run registered examples (default: all).
    PaperExamples {
        ids: Vec<String>,
    },
}

fn format_of(cli: &Cli) -> Format {
    if cli.json {
        return Format::Json;
    }
    match cli.format {
        Some(OutFormat::Json) => Format::Json,
        Some(OutFormat::Csv) => Format::Csv,
        Some(OutFormat::Text) | None => Format::Text,
    }
}

fn base_report(cli: &Cli, name: &str) -> Report {
    let mut r = Report::new(name);
    r.config("tol", cli.tol).config("grid", cli.grid).config("seed", cli.seed).config("level", cli.level);
    r
}

fn polys(paths: &[String]) -> symbidisc::Result<Vec<BiPoly>> {
    paths.iter().map(|p| parse_poly(p)).collect()
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let report = match &cli.command {
        Command::ClassifyPair { pair, candidates } => {
            let pair = parse_pair(pair)?;
            let class = classify_pair(&pair, AlphaGrid::default(), cli.tol.min(1e-8))?;
            let mut r = base_report(cli, "classify-pair");
            r.result("flags", &class.flags).result("residuals", &class.residuals).result("warnings", &class.warnings);
            let js: Vec<[f64; 4]> = class.joint_spectrum.iter().map(|g| [g.s.re, g.s.im, g.p.re, g.p.im]).collect();
            r.result("joint_spectrum", js);
            let cands = polys(candidates)?;
            let cert = gamma_distinguished_certificate(&pair, &cands, cli.grid, cli.tol)?;
            r.result("distinguished_certificate", &cert);
            r
        }
        Command::ClassifyPoly { poly, region } => {
            let p = parse_poly(poly)?;
            let mut r = base_report(cli, "classify-poly");
            r.result("poly", &p).result("polynomial", p.to_string());
            match region {
                RegionArg::Bidisc => {
                    r.result("verdict", classify_bidisc(&p, cli.grid, cli.tol));
                }
                RegionArg::Gamma => {
                    r.result("verdict", classify_gamma(&p, cli.grid, cli.tol));
                }
            }
            let region = Region::from(*region);
            r.samples = Some(SampleTable::from_points(&sample_variety(&p, region, cli.grid), region));
            r
        }
        Command::Fundamental { pair } => {
            let pair = parse_pair(pair)?;
            pair.validate()?;
            let f = fundamental_operator(&pair)?;
            let mut r = base_report(cli, "fundamental");
            r.result("fundamental", &f);
            r.result("numerical_radius", symbidisc::numlin::numerical_radius(&f.a)?);
            r.check(Check::at_most("fundamental equation residual", f.residual, 1e-7));
            r
        }
        Command::Dilate { pair, degree } => {
            let pair = parse_pair(pair)?;
            let bundle = build_ta_v0(&pair)?;
            let mut r = base_report(cli, "dilate");
            let iso = gamma_isometry_residuals(&bundle.ta, &bundle.v0)?;
            let comp = verify_compression(&bundle, *degree)?;
            let (c1, c2, d1, d2) = dilation_blocks(&bundle)?;
            let eqs = check_gamma_dilation_eqs(&pair.s, &pair.p, &c1, &c2, &d1, &d2)?;
            let trunc = build_tn_vn(&pair, cli.level.max(1))?;
            let cert = norm_certificate(&bundle.ta, 2.0, 1024, &[2, 4, 8, 16, 32]);
            r.check(Check::at_most("V0*V0 − I", iso.v_isometry, 1e-10));
            r.check(Check::at_most("T_A*V0 − T_A", iso.t_star_v, 1e-10));
            r.check(Check::at_most("T_AV0 − V0T_A", iso.commutator, 1e-10));
            r.check(Check::at_most(format!("compression up to degree {degree}"), comp, 1e-9));
            r.check(Check::at_most("dilation equations", eqs.max(), 1e-10));
            r.check(Check::at_most("T_n − T_n*V_n pattern", trunc.yn_check, 1e-10));
            r.check(Check::is_true("‖T_A‖ ≤ 2 certified", cert.certified));
            r.result("bundle", &bundle)
                .result("isometry_residuals", &iso)
                .result("compression_residual", comp)
                .result("dilation_equations", &eqs)
                .result("truncation", &trunc)
                .result("norm_certificate", &cert);
            r
        }
        Command::VnCheck { pair, f, variety, region } => {
            let pair = parse_pair(pair)?;
            let rep = vn_check(&pair, &parse_poly(f)?, &parse_poly(variety)?, (*region).into(), cli.grid)?;
            let mut r = base_report(cli, "vn-check");
            r.result("report", &rep);
            r
        }
        Command::CompleteVnCheck { pair, variety, region, degree, trials, seeded } => {
            let pair = parse_pair(pair)?;
            let seeded: Vec<_> = polys(seeded)?.into_iter().map(|p| vec![vec![p]]).collect();
            let rep = complete_vn_check(&pair, &parse_poly(variety)?, (*region).into(), cli.grid, *degree, *trials, cli.seed, &seeded)?;
            let mut r = base_report(cli, "complete-vn-check");
            r.result("report", &rep);
            r
        }
        Command::Decompose { pair, model, factors } => {
            let factors = polys(factors)?;
            let mut r = base_report(cli, "decompose");
            let result = match (pair, model) {
                (Some(pair), None) => {
                    let pair = parse_pair(pair)?;
                    if factors.len() == 2 {
                        let o = orthogonality_check(&pair, &factors[0], &factors[1])?;
                        r.check(Check::at_most("‖q1(Σ)*q2(Σ)‖", o.value, 1e-8));
                        r.result("orthogonality_check", &o);
                    }
                    let d = factor_decompose_unitary(&pair, &factors)?;
                    r.check(Check::at_most("pairwise orthogonality", d.orthogonality, 1e-8));
                    r.check(Check::at_most("span defect", d.span_defect, 1e-8));
                    for (j, res) in d.residuals.iter().enumerate() {
                        r.check(Check::at_most(format!("factor {j} annihilation"), res.annihilation, 1e-7));
                        r.check(Check::at_most(format!("factor {j} reducing"), res.invariance, 1e-8));
                    }
                    d
                }
                (None, Some(model)) => {
                    let f = parse_matrix(model)?;
                    let d = factor_decompose_pure_truncated(&f, &factors, cli.level)?;
                    for (j, res) in d.residuals.iter().enumerate() {
                        r.check(Check::at_most(format!("factor {j} annihilation"), res.annihilation, 1e-6));
                        if let Some(v) = res.interior_invariance {
                            r.check(Check::at_most(format!("factor {j} interior invariance"), v, 1e-6));
                        }
                    }
                    d
                }
                _ => return Err(Error::Usage("decompose needs exactly one of --pair or --model".into()).into()),
            };
            r.result("decomposition", &result);
            r
        }
        Command::PaperExamples { ids } => {
            let cfg = RegistryConfig { grid: cli.grid, tol: cli.tol, seed: cli.seed };
            let ids: Vec<String> = if ids.is_empty() || ids.iter().any(|i| i == "all") {
                case_ids().into_iter().map(String::from).collect()
            } else {
                ids.clone()
            };
            let reports: Vec<symbidisc::Result<Report>> = if cli.parallel {
                ids.par_iter().map(|id| run_example(id, &cfg)).collect()
            } else {
                ids.iter().map(|id| run_example(id, &cfg)).collect()
            };
            let mut r = base_report(cli, "paper-examples");
            for (id, rep) in ids.iter().zip(reports) {
                r.absorb(id, rep?);
            }
            r
        }
    };
    Ok(report)
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Usage(_)) | Some(Error::Parse { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let text = match emit_report(&report, format_of(&cli)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
