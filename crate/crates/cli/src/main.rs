mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use margolis_core::graded::{Window, WindowedGradedSpace};
use margolis_core::margolis::margolis_homology;
use margolis_core::qmod::{QModule, QModuleFile};
use margolis_core::steenrod::{ComoduleWindow, DualSteenrod, Verdict};
use margolis_core::suite::{appendix_suite, check_module, kunneth_suite, SuiteConfig, DEFAULT_SEED};
use margolis_core::tate::{
    build_bpn_einf_stage, build_sphere_stage, condition_h_bound, stage_condition_h, verify_vanishing,
};
use serde_json::json;

use report::{Outcome, Report};

#[derive(Parser)]
#[command(name = "margolis", version, about = "Margolis homology and Tate-stage verifications over F_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded random-module suites: Q² = 0, duality, Ext, decomposition, LES, Künneth.
    VerifyAppendix(AppendixArgs),
    /// Per-degree Margolis homology of a module file.
    Margolis(ModuleArgs),
    /// Comodule primitives of a Tate stage, or of a trivial comodule.
    Primitives(PrimitiveArgs),
    /// Condition H for BP⟨n⟩ Tate stages against the enumerated bound.
    ConditionH(StageArgs),
    /// Margolis homology of the BP⟨n⟩ Tate tower and its limit.
    VerifyVanishing(VanishingArgs),
    /// Free and trivial cyclic summands of a module file.
    Decompose(ModuleArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AppendixArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Restrict to one prime (default 2, 3, 5).
    #[arg(long)]
    prime: Option<u64>,
    /// Degree span of the random modules.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    window: Option<(i64, i64)>,
    /// Modules per (p, |Q|) case.
    #[arg(long)]
    count: Option<usize>,
    /// Also run the per-module checks on this module file.
    #[arg(long)]
    module: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ModuleArgs {
    #[arg(long)]
    module: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PrimitiveArgs {
    #[arg(long, default_value_t = 3)]
    prime: u64,
    /// BP⟨n⟩ height; the sphere stage when omitted.
    #[arg(long)]
    height: Option<u32>,
    /// Stage index k.
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-20:20")]
    window: (i64, i64),
    /// Graded space file; its primitives under the trivial coaction.
    #[arg(long)]
    module: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StageArgs {
    #[arg(long, default_value_t = 3)]
    prime: u64,
    #[arg(long, default_value_t = 0)]
    height: u32,
    /// Stage indices k, as lo:hi.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "2:6")]
    filtrations: (i64, i64),
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-40:80")]
    window: (i64, i64),
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VanishingArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Index m of the Milnor primitive Q_m.
    #[arg(long)]
    qm: u32,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((lo, hi))
}

fn window(r: (i64, i64)) -> anyhow::Result<Window> {
    Ok(Window::new(r.0, r.1)?)
}

fn stage_indices(r: (i64, i64)) -> anyhow::Result<Vec<u32>> {
    if r.0 < 2 || r.1 < r.0 {
        bail!("filtrations {}:{} must satisfy 2 ≤ lo ≤ hi", r.0, r.1);
    }
    Ok((r.0..=r.1).map(|k| k as u32).collect())
}

fn read_module(path: &Path) -> anyhow::Result<QModule> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file = QModuleFile::from_json(&text).map_err(|e| anyhow::Error::new(e).context(path.display().to_string()))?;
    Ok(file.build()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, config, out, run): (&'static str, serde_json::Value, Option<PathBuf>, anyhow::Result<Outcome>) =
        match &cli.command {
            Command::VerifyAppendix(a) => (
                "verify-appendix",
                json!({ "seed": a.seed, "prime": a.prime, "window": a.window, "count": a.count, "module": a.module }),
                a.common.out.clone(),
                cmd_verify_appendix(a),
            ),
            Command::Margolis(a) => {
                ("margolis", json!({ "module": a.module }), a.common.out.clone(), cmd_margolis(&a.module))
            }
            Command::Primitives(a) => (
                "primitives",
                json!({ "prime": a.prime, "height": a.height, "k": a.k, "window": a.window, "module": a.module }),
                a.common.out.clone(),
                cmd_primitives(a),
            ),
            Command::ConditionH(a) => (
                "condition-h",
                json!({ "prime": a.prime, "height": a.height, "filtrations": a.filtrations, "window": a.window }),
                a.common.out.clone(),
                cmd_condition_h(a),
            ),
            Command::VerifyVanishing(a) => (
                "verify-vanishing",
                json!({
                    "prime": a.stage.prime, "height": a.stage.height, "qm": a.qm,
                    "filtrations": a.stage.filtrations, "window": a.stage.window,
                }),
                a.stage.common.out.clone(),
                cmd_verify_vanishing(a),
            ),
            Command::Decompose(a) => {
                ("decompose", json!({ "module": a.module }), a.common.out.clone(), cmd_decompose(&a.module))
            }
        };
    let outcome = match run {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{name}: {e:#}");
            return report::error_code(&e);
        }
    };
    for line in &outcome.summary {
        println!("{line}");
    }
    println!("{name}: {}", verdict_word(outcome.verdict));
    if let Some(path) = out {
        let r = Report { schema_version: report::SCHEMA_VERSION, command: name, config, verdict: outcome.verdict, result: outcome.result };
        if let Err(e) = report::write(&path, &r) {
            eprintln!("{name}: {e:#}");
            return ExitCode::from(1);
        }
    }
    report::exit_code(outcome.verdict)
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn cmd_verify_appendix(a: &AppendixArgs) -> anyhow::Result<Outcome> {
    let mut app = SuiteConfig::appendix(a.seed);
    let mut kun = SuiteConfig::kunneth(a.seed);
    for cfg in [&mut app, &mut kun] {
        if let Some(p) = a.prime {
            margolis_core::fplin::check_prime(p)?;
            cfg.primes = vec![p];
        }
        if let Some(w) = a.window {
            cfg.width = window(w)?.len() as i64 - 1;
        }
        if let Some(c) = a.count {
            cfg.count = c;
        }
    }
    let ra = appendix_suite(&app)?;
    let rk = kunneth_suite(&kun)?;
    let mut summary: Vec<String> = ra
        .checks
        .iter()
        .chain(&rk.checks)
        .map(|c| format!("{:<24} passed {:>5}  failed {:>3}  inconclusive {:>3}", c.name, c.passed, c.failed, c.inconclusive))
        .collect();
    let mut verdict = report::worst(ra.verdict, rk.verdict);
    let mut result = json!({ "appendix": ra, "kunneth": rk });
    if let Some(path) = &a.module {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let m = QModuleFile::from_json(&text)?.build()?;
        let r = check_module(&m, app.max_s)?;
        summary.push(format!("module {}: {}", path.display(), verdict_word(r.verdict)));
        verdict = report::worst(verdict, r.verdict);
        result["module"] = serde_json::to_value(&r)?;
    }
    Ok(Outcome { verdict, result, summary })
}

fn cmd_margolis(path: &Path) -> anyhow::Result<Outcome> {
    let m = read_module(path)?;
    let h = margolis_homology(&m)?;
    let rows: Vec<_> = h
        .table
        .iter()
        .map(|r| json!({ "degree": r.degree, "dim": r.homology, "labels": h.homology.labels(r.degree) }))
        .collect();
    let summary = std::iter::once(format!("H(M;Q), |Q| = {}, valid window {}", m.qdeg(), h.valid_window))
        .chain(h.table.iter().filter(|r| r.homology > 0).map(|r| format!("  degree {:>5}: {}", r.degree, r.homology)))
        .collect();
    Ok(Outcome {
        verdict: Verdict::Pass,
        result: json!({
            "qdeg": m.qdeg(),
            "valid_window": h.valid_window,
            "zero": h.is_zero(),
            "table": rows,
        }),
        summary,
    })
}

fn cmd_primitives(a: &PrimitiveArgs) -> anyhow::Result<Outcome> {
    let w = window(a.window)?;
    if let Some(path) = &a.module {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let space: WindowedGradedSpace = serde_json::from_str(&text)
            .map_err(|e| margolis_core::Error::Parse(format!("{}: {e}", path.display())))?;
        let sw = space.window();
        let fragment = DualSteenrod::new(space.p(), sw.hi - sw.lo)?;
        let c = ComoduleWindow::trivial(fragment, space)?;
        let prims = c.primitives();
        return Ok(Outcome {
            verdict: Verdict::Pass,
            summary: vec![format!("trivial comodule: {} primitives on {}", prims.dims.iter().map(|d| d.1).sum::<usize>(), prims.window)],
            result: json!({ "primitives": prims }),
        });
    }
    let stage = match a.height {
        None => build_sphere_stage(a.prime, a.k, w)?,
        Some(n) => build_bpn_einf_stage(a.prime, n, a.k, w)?,
    };
    let prims = stage.comodule.primitives();
    let mut summary = vec![format!("valid window {}", prims.window)];
    summary.extend(prims.labels.iter().map(|(d, l)| format!("  degree {d:>5}: {}", l.join(", "))));
    let mut result = json!({ "primitives": prims });
    if a.height.is_none() {
        let k = a.k as i64;
        let got = stage.primitive_t_powers();
        let lo = -prims.window.hi.div_euclid(2);
        let rule = |f: &dyn Fn(i64) -> bool| (lo..k).filter(|&j| j == 0 || f(j)).collect::<Vec<_>>();
        let strict = rule(&|j| 2 * j > k + 1);
        let shifted = rule(&|j| 2 * j > k);
        summary.push(format!("t-powers {got:?}; 2j>k+1 gives {strict:?}; 2j>k gives {shifted:?}"));
        result["t_powers"] = json!(got);
        result["rule_2j_gt_k_plus_1"] = json!(strict);
        result["rule_2j_gt_k"] = json!(shifted);
    }
    Ok(Outcome { verdict: Verdict::Pass, result, summary })
}

fn cmd_condition_h(a: &StageArgs) -> anyhow::Result<Outcome> {
    let w = window(a.window)?;
    let ks = stage_indices(a.filtrations)?;
    let bound = condition_h_bound(a.prime, a.height, w);
    let mut verdict = Verdict::Pass;
    let mut stages = Vec::new();
    let mut summary = vec![format!("enumerated bound {bound}")];
    for k in ks {
        let stage = build_bpn_einf_stage(a.prime, a.height, k, w)?;
        let r = stage_condition_h(&stage, w);
        let over: Vec<_> = stage.comodule.primitives().labels.into_iter().filter(|(d, _)| *d > bound).collect();
        summary.push(format!("  k={k}: max primitive degree {:?}, {}", r.max_primitive_degree, verdict_word(r.verdict)));
        verdict = report::worst(verdict, r.verdict);
        stages.push(json!({ "k": k, "report": r, "primitives_above_bound": over }));
    }
    Ok(Outcome { verdict, result: json!({ "bound": bound, "stages": stages }), summary })
}

fn cmd_verify_vanishing(a: &VanishingArgs) -> anyhow::Result<Outcome> {
    let s = &a.stage;
    let r = verify_vanishing(s.prime, s.height, a.qm, &stage_indices(s.filtrations)?, window(s.window)?)?;
    let summary = vec![
        format!("common window {}", r.window),
        format!("tensor factor acyclic: {}", r.tensor_acyclic),
        format!("V-summand maps zero: {}", r.v_maps_zero),
        format!("lim dims {:?}, lim¹ dims {:?}", r.lim_dims, r.lim1_dims),
    ];
    Ok(Outcome { verdict: r.verdict, result: serde_json::to_value(&r)?, summary })
}

fn cmd_decompose(path: &Path) -> anyhow::Result<Outcome> {
    let m = read_module(path)?;
    let dec = m.cyclic_decompose()?;
    let summary = vec![
        format!("valid window {}", dec.valid_window),
        format!("free summands (top degrees) {:?}", dec.free),
        format!("trivial summands {:?}", dec.trivial),
    ];
    Ok(Outcome { verdict: Verdict::Pass, result: serde_json::to_value(&dec)?, summary })
}
