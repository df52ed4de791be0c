use std::fmt::Write as _;
use std::path::Path;

use convexlab::affine_sphere::{unimodularity_check, SolverConfig};
use convexlab::chord::{
    chord_identity_check, comparison_audit, estimate_comparison_constant, mid_chord_through,
    norm_ratio_range, reliable_profile, reliable_t_range, sample_chords, slope_bound_check,
    ChordProfile,
};
use convexlab::entropy::{
    ball_inclusion_check, entropy_estimate, r_max, uniformity_constant, VolumeForm, VolumeKind,
};
use convexlab::grid::COLLAR_CELLS;
use convexlab::hilbert::metric_field_csv;
use convexlab::interp::AffineSphere;
use convexlab::io::solution_dump;
use convexlab::projective::{ConvexDomain, DomainSpec, Normalization};
use convexlab::spectrum::{
    blaschke_length_upper, check_invariance, limit_set_domain, reduced_words, spectrum_csv,
    translation_length_dyn, translation_length_eig, GeneratorSet, GroupElement, SpectrumEntry,
    N_MAX, REPORT_DEPTH,
};
use convexlab::svg::{glyph_field, line_plot, Series};
use convexlab::Error;
use nalgebra::{Matrix3, Vector2};
use serde_json::json;

use crate::{Cli, Command, Format, Kind};

pub struct Outcome {
    pub files: Vec<(String, String)>,
    /// An audited inequality failed.
    pub violated: bool,
    pub summary: String,
}

pub struct Failure {
    pub message: String,
    pub files: Vec<(String, String)>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            message: e.to_string(),
            files: vec![],
        }
    }
}

fn fail(message: impl Into<String>) -> Failure {
    Failure {
        message: message.into(),
        files: vec![],
    }
}

type Run = Result<Outcome, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn spec(cli: &Cli) -> Result<DomainSpec, Failure> {
    let path = cli
        .domain
        .as_ref()
        .ok_or_else(|| fail("--domain is required"))?;
    DomainSpec::from_json(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn domain(cli: &Cli) -> Result<(ConvexDomain, Normalization), Failure> {
    Ok(ConvexDomain::from_spec(&spec(cli)?)?)
}

fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,residual_sup\n");
    for (i, r) in trace.iter().enumerate() {
        writeln!(out, "{i},{r:.6e}").expect("string write");
    }
    out
}

/// Solves, turning non-convergence into a failure that carries the trace.
fn solve(cli: &Cli, d: &ConvexDomain) -> Result<AffineSphere, Failure> {
    let cfg = SolverConfig {
        h: cli.h,
        tol: cli.tol,
        ..Default::default()
    };
    AffineSphere::solve(d, &cfg).map_err(|e| match e {
        Error::NonConvergence { ref trace, .. } => Failure {
            message: format!("{e}; residual trace in residual_trace.csv"),
            files: vec![("residual_trace.csv".into(), trace_csv(trace))],
        },
        e => e.into(),
    })
}

fn header(cli: &Cli, extra: &str) -> String {
    let domain = cli
        .domain
        .as_ref()
        .map_or("-".into(), |p| p.display().to_string());
    format!(
        "# seed={} domain={domain} h={} tol={:e}{extra}\n",
        cli.seed, cli.h, cli.tol
    )
}

pub fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Solve => run_solve(cli),
        Command::Metrics => run_metrics(cli),
        Command::Chord { chords, samples } => run_chord(cli, *chords, *samples),
        Command::Compare { pairs } => run_compare(cli, *pairs),
        Command::Entropy {
            radii,
            kind,
            base,
            samples,
        } => run_entropy(cli, radii.as_deref(), *kind, base.as_deref(), *samples),
        Command::Spectrum {
            generators,
            depth,
            n,
        } => run_spectrum(cli, generators, *depth, *n),
        Command::Plot { glyphs } => run_plot(cli, *glyphs),
    }
}

fn run_solve(cli: &Cli) -> Run {
    let (d, _) = domain(cli)?;
    let s = solve(cli, &d)?;
    let sol = &s.solution;
    Ok(Outcome {
        files: vec![
            ("solution.csv".into(), solution_dump(&s)),
            ("residuals.csv".into(), trace_csv(&sol.trace)),
        ],
        violated: false,
        summary: format!(
            "converged in {} iterations, residual {:.3e}, {} nodes",
            sol.iterations,
            sol.residual_sup,
            sol.grid.len()
        ),
    })
}

fn run_metrics(cli: &Cli) -> Run {
    let (d, _) = domain(cli)?;
    let s = solve(cli, &d)?;
    let (ratio_min, ratio_max) = norm_ratio_range(&s)?;
    let (mut k_lo, mut k_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in s.reliable_nodes() {
        let kap = s.field.kappa[k];
        if kap.is_finite() {
            k_lo = k_lo.min(kap);
            k_hi = k_hi.max(kap);
        }
    }
    let rows: Vec<(&str, f64)> = vec![
        ("h", s.h()),
        ("nodes", s.solution.grid.len() as f64),
        ("iterations", s.solution.iterations as f64),
        ("residual_sup", s.solution.residual_sup),
        (
            "unimodularity",
            unimodularity_check(&s.solution, &s.field, COLLAR_CELLS),
        ),
        ("c_est", estimate_comparison_constant(&s)?),
        ("norm_ratio_min", ratio_min),
        ("norm_ratio_max", ratio_max),
        ("kappa_min", k_lo),
        ("kappa_max", k_hi),
        (
            "uniformity_blaschke",
            uniformity_constant(&s, &VolumeForm::new(&s, VolumeKind::Blaschke)?)?,
        ),
        (
            "uniformity_busemann",
            uniformity_constant(&s, &VolumeForm::new(&s, VolumeKind::Busemann)?)?,
        ),
    ];
    let pinched = k_lo >= -1.05 && k_hi <= 0.05;
    let report = match cli.format {
        Format::Csv => {
            let mut out = header(cli, "") + "quantity,value\n";
            for (k, v) in &rows {
                writeln!(out, "{k},{v:.12e}").expect("string write");
            }
            ("metrics.csv", out)
        }
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = rows
                .iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect();
            (
                "metrics.json",
                serde_json::to_string_pretty(&json!({ "seed": cli.seed, "metrics": map }))
                    .expect("serializable")
                    + "\n",
            )
        }
    };
    Ok(Outcome {
        files: vec![(report.0.into(), report.1), ("hilbert_field.csv".into(), metric_field_csv(&d, 32)?)],
        violated: !pinched,
        summary: format!("C_est {:.4}, h^B/F^2 in [{ratio_min:.4}, {ratio_max:.4}], kappa in [{k_lo:.4}, {k_hi:.4}]", rows[5].1),
    })
}

fn run_chord(cli: &Cli, n_chords: usize, samples: usize) -> Run {
    let (d, _) = domain(cli)?;
    let s = solve(cli, &d)?;
    let c = estimate_comparison_constant(&s)?;
    let mut files = vec![];
    let mut summary = vec![];
    let mut violated = false;
    for (k, chord) in sample_chords(&d, n_chords)?.iter().enumerate() {
        let (t0, t1) = reliable_t_range(&s, chord)?;
        let prof = reliable_profile(&s, chord, samples)?;
        let check = slope_bound_check(&prof, c)?;
        violated |= !check.pass;
        let residual = chord_identity_check(&prof);
        summary.push(json!({
            "chord": k, "t_min": t0, "t_max": t1, "identity_residual": residual,
            "max_abs_slope": check.max_abs_slope, "bound": check.bound, "pass": check.pass,
        }));
        files.push((
            format!("chord_{k}.svg"),
            profile_plot(&format!("chord {k}"), &prof),
        ));
        files.push((format!("chord_{k}.csv"), prof.to_csv()));
    }
    let report = match cli.format {
        Format::Csv => {
            let mut out = header(cli, &format!(" C_est={c:.12e}"))
                + "chord,t_min,t_max,identity_residual,max_abs_slope,bound,pass\n";
            for r in &summary {
                writeln!(
                    out,
                    "{},{:.9},{:.9},{:.6e},{:.9},{:.9},{}",
                    r["chord"],
                    r["t_min"].as_f64().unwrap_or(f64::NAN),
                    r["t_max"].as_f64().unwrap_or(f64::NAN),
                    r["identity_residual"].as_f64().unwrap_or(f64::NAN),
                    r["max_abs_slope"].as_f64().unwrap_or(f64::NAN),
                    r["bound"].as_f64().unwrap_or(f64::NAN),
                    r["pass"]
                )
                .expect("string write");
            }
            ("chords.csv", out)
        }
        Format::Json => (
            "chords.json",
            serde_json::to_string_pretty(
                &json!({ "seed": cli.seed, "c_est": c, "chords": summary }),
            )
            .expect("serializable")
                + "\n",
        ),
    };
    files.insert(0, (report.0.into(), report.1));
    let failing = summary.iter().filter(|r| r["pass"] == json!(false)).count();
    Ok(Outcome {
        files,
        violated,
        summary: format!(
            "{} chords, C_est {c:.4}, {failing} slope-bound violations",
            summary.len()
        ),
    })
}

fn profile_plot(title: &str, p: &ChordProfile) -> String {
    let series = [
        Series::new("alpha", &p.ts, &p.alpha),
        Series::new("alpha'", &p.ts, &p.alpha_p),
        Series::new("alpha''", &p.ts, &p.alpha_pp),
        Series::new("hB(x', x')", &p.ts, &p.hb_chord),
    ];
    line_plot(title, "t", "", &series)
}

fn run_compare(cli: &Cli, pairs: usize) -> Run {
    let (d, _) = domain(cli)?;
    let s = solve(cli, &d)?;
    let rep = comparison_audit(&s, pairs, cli.seed)?;
    let file = match cli.format {
        Format::Csv => ("audit.csv", rep.to_csv()),
        Format::Json => (
            "audit.json",
            serde_json::to_string_pretty(&rep).expect("serializable") + "\n",
        ),
    };
    Ok(Outcome {
        files: vec![(file.0.into(), file.1)],
        violated: !rep.passed(),
        summary: format!(
            "{pairs} pairs, C_est {:.4}, violations: sharp {} unit-gap {}",
            rep.c_est, rep.violations_sharp, rep.violations_unit
        ),
    })
}

const DEFAULT_RADII: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

fn run_entropy(
    cli: &Cli,
    radii: Option<&[f64]>,
    kind: Kind,
    base: Option<&[f64]>,
    samples: usize,
) -> Run {
    let (d, _) = domain(cli)?;
    let s = solve(cli, &d)?;
    let o = base.map_or_else(|| d.centroid(), |b| Vector2::new(b[0], b[1]));
    let rm = r_max(&s, &o)?;
    let r_list: Vec<f64> = match radii {
        Some(r) => r.to_vec(),
        None => DEFAULT_RADII.iter().copied().filter(|r| *r <= rm).collect(),
    };
    let kind = match kind {
        Kind::Blaschke => VolumeKind::Blaschke,
        Kind::Busemann => VolumeKind::Busemann,
    };
    let form = VolumeForm::new(&s, kind)?;
    let est = entropy_estimate(&s, &form, &o, &r_list)?;
    let r_top = *r_list
        .iter()
        .max_by(|a, b| a.total_cmp(b))
        .expect("nonempty radius list");
    let outside = ball_inclusion_check(&s, &o, r_top, samples, cli.seed)?;
    let file = match cli.format {
        Format::Csv => ("entropy.csv", est.to_csv(Some(cli.seed))),
        Format::Json => (
            "entropy.json",
            serde_json::to_string_pretty(&json!({ "seed": cli.seed, "kind": kind, "base": [o.x, o.y], "estimate": est, "inclusion_violations": outside }))
                .expect("serializable")
                + "\n",
        ),
    };
    let hyperbolic: Vec<f64> = r_list
        .iter()
        .map(|r| (2.0 * std::f64::consts::PI * (r.cosh() - 1.0)).ln())
        .collect();
    let plot = line_plot(
        "log ball volume",
        "R",
        "log V",
        &[
            Series::new("measured", &r_list, &est.log_volumes),
            Series::new("hyperbolic plane", &r_list, &hyperbolic),
        ],
    );
    Ok(Outcome {
        files: vec![(file.0.into(), file.1), ("entropy.svg".into(), plot)],
        violated: outside > 0,
        summary: format!(
            "rate {:.4} (raw slope {:.4}), R_max {rm:.4}, {outside} inclusion violations",
            est.rate, est.raw_slope
        ),
    })
}

/// Generators in the raw chart of the domain they act on, the chart change
/// into the normalized domain, and that normalized domain.
struct Frames {
    raw: ConvexDomain,
    to_raw: Matrix3<f64>,
    to_normalized: Matrix3<f64>,
    normalized: ConvexDomain,
    note: String,
}

fn conjugate(c: &Matrix3<f64>, g: &GroupElement) -> Result<GroupElement, Failure> {
    let inv = c
        .try_inverse()
        .ok_or_else(|| fail("singular chart change"))?;
    Ok(GroupElement::new(c * g.m * inv)?)
}

fn run_spectrum(cli: &Cli, generators: &Path, depth: usize, n: usize) -> Run {
    let gens = GeneratorSet::from_json(&read(generators)?)
        .map_err(|e| fail(format!("{}: {e}", generators.display())))?;
    let frames = if cli.domain.is_some() {
        let spec = spec(cli)?;
        let raw = ConvexDomain::from_spec_raw(&spec)?;
        for g in &gens.generators {
            check_invariance(&raw, &g.matrix(), 1e-9).map_err(|_| {
                fail(format!(
                    "generator `{}` does not preserve the domain",
                    g.label
                ))
            })?;
        }
        let (normalized, norm) = ConvexDomain::from_spec(&spec)?;
        Frames {
            raw,
            to_raw: Matrix3::identity(),
            to_normalized: norm.matrix(),
            normalized,
            note: String::new(),
        }
    } else {
        let ls = limit_set_domain(&gens, depth)?;
        let defect = ls.invariance_defect.iter().fold(0.0f64, |a, b| a.max(*b));
        Frames {
            raw: ls.raw.clone(),
            to_raw: ls.frame,
            to_normalized: ls.conjugator(),
            normalized: ls.domain.clone(),
            note: format!(
                " limit_set_depth={depth} invariance_defect={defect:.3e} skipped={}",
                ls.skipped.len()
            ),
        }
    };
    let s = solve(cli, &frames.normalized)?;
    let mut entries = vec![];
    let mut skipped = vec![];
    for w in reduced_words(&gens.generators, REPORT_DEPTH)? {
        let l_h_eig = match translation_length_eig(&w.element) {
            Ok(l) => l,
            Err(e) => {
                skipped.push(format!("{}: {e}", w.label));
                continue;
            }
        };
        let raw = conjugate(&frames.to_raw, &w.element)?;
        let l_h_dyn = translation_length_dyn(&frames.raw, &raw, &frames.raw.centroid(), N_MAX)
            .ok()
            .map(|d| d.value);
        let normed = conjugate(&frames.to_normalized, &w.element)?;
        let l_b_upper = blaschke_length_upper(&s, &normed, &frames.normalized.centroid(), n).ok();
        entries.push(SpectrumEntry {
            word: w.label,
            l_h_eig,
            l_h_dyn,
            l_b_upper,
            n_b: n,
        });
    }
    let failing = entries.iter().filter(|e| !e.pass()).count();
    let file = match cli.format {
        Format::Csv => {
            let head = header(
                cli,
                &format!(" generators={}{}", generators.display(), frames.note),
            );
            (
                "spectrum.csv",
                spectrum_csv(&entries, head.trim_start_matches("# ").trim_end()),
            )
        }
        Format::Json => {
            let rows: Vec<_> = entries
                .iter()
                .map(|e| json!({ "entry": e, "pass": e.pass() }))
                .collect();
            (
                "spectrum.json",
                serde_json::to_string_pretty(
                    &json!({ "seed": cli.seed, "entries": rows, "skipped": skipped }),
                )
                .expect("serializable")
                    + "\n",
            )
        }
    };
    for s in &skipped {
        eprintln!("skipped {s}");
    }
    Ok(Outcome {
        files: vec![(file.0.into(), file.1)],
        violated: failing > 0,
        summary: format!(
            "{} words, {failing} failing, {} skipped",
            entries.len(),
            skipped.len()
        ),
    })
}

fn run_plot(cli: &Cli, glyphs: usize) -> Run {
    let (d, _) = domain(cli)?;
    let s = solve(cli, &d)?;
    let o = d.centroid();
    let mid = reliable_profile(
        &s,
        &mid_chord_through(&d, &o, &Vector2::new(1.0, 0.0))?,
        201,
    )?;
    let rm = r_max(&s, &o)?;
    let radii: Vec<f64> = (1..=24).map(|i| rm * i as f64 / 24.0).collect();
    let mut volumes = vec![Series::new(
        "hyperbolic plane",
        &radii,
        &radii
            .iter()
            .map(|r| (2.0 * std::f64::consts::PI * (r.cosh() - 1.0)).ln())
            .collect::<Vec<_>>(),
    )];
    for (label, kind) in [
        ("Blaschke", VolumeKind::Blaschke),
        ("Busemann", VolumeKind::Busemann),
    ] {
        let est = entropy_estimate(&s, &VolumeForm::new(&s, kind)?, &o, &radii)?;
        volumes.push(Series::new(label, &radii, &est.log_volumes));
    }
    Ok(Outcome {
        files: vec![
            ("glyphs.svg".into(), glyph_field(&s, glyphs)?),
            (
                "alpha_profile.svg".into(),
                profile_plot("horizontal mid-chord", &mid),
            ),
            (
                "volumes.svg".into(),
                line_plot("log ball volume", "R", "log V", &volumes),
            ),
        ],
        violated: false,
        summary: "wrote glyphs.svg, alpha_profile.svg, volumes.svg".into(),
    })
}
