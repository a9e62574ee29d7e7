use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use marclab::noncompactness::{
    alt_certificate_check, alt_witness_params, build_packing, linf_lower_certificate, verify_alt_witness_params,
    verify_general_lower_certificate, verify_packing, AltCertificate, AltWitnessParams, BallSize, Cube,
    GeneralLowerCertificate, IndicatorPacking, LinfCertificate, NamedCheck, Packing,
};
use marclab::norms::{norm_big_m_phi_checked, norm_m_phi, quasinorm_constant_y, QuasinormConstant};
use marclab::phi::{classify_phi, PhiClassification};
use marclab::rational::{format_rational, parse_rational};
use marclab::sample::inequality_sweep;
use marclab::superadditivity::{gen_counterexample, superadditivity_defect};
use marclab::{
    Fundamental, Majorant, Measure, NormResult, NumericPolicy, PhiSpec, Scalar, Space, StepFunction, Verdict,
};
use num::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::output::{csv_text, format_float, sparkline_svg, trace_csv, write_file, Sink, SCHEMA_VERSION};
use crate::{CertifyKind, Cli, Command, Status};

pub fn run(cli: Cli) -> Result<Status> {
    let policy = cli.global.policy()?;
    let sink = Sink::new(cli.global.out.clone());
    match cli.command {
        Command::Phi { phi } => phi_report(&load_phi(&phi)?, &policy, &sink),
        Command::Rearrange { f, exact } => {
            if exact {
                rearrange::<BigRational>(&f, &sink)
            } else {
                rearrange::<f64>(&f, &sink)
            }
        }
        Command::Norm { phi, f, space } => norm_report(&load_phi(&phi)?, &f, space, &policy, &sink),
        Command::Superadd {
            space,
            phi,
            sizes,
            gamma,
            t0,
            svg,
        } => superadd(space, &load_phi(&phi)?, &sizes, &gamma, t0, svg.as_deref(), &policy, &sink),
        Command::Pack {
            n,
            t1,
            ratio,
            side,
            center,
        } => pack(n, t1, ratio.as_deref(), &side, &center, &sink),
        Command::Certify { kind } => certify(kind, &policy, &sink),
        Command::WitnessParams {
            phi,
            space,
            norm_t,
            lambda,
            centers,
        } => witness_params(&load_phi(&phi)?, space, norm_t, lambda, centers, &policy, &sink),
        Command::Ineq {
            seed,
            pairs,
            points,
            disjoint,
        } => {
            let sweep = inequality_sweep(seed, pairs, points, &disjoint)?;
            sink.json("ineq", &sweep)?;
            Ok(status(sweep.failures == 0))
        }
    }
}

fn status(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A path to a phi document, or the short `power_log:...` form.
fn load_phi(arg: &str) -> Result<PhiSpec> {
    if Path::new(arg).is_file() {
        read_json(Path::new(arg))
    } else {
        Ok(PhiSpec::parse_short(arg)?)
    }
}

fn check_schema(found: u32, path: &Path) -> Result<()> {
    if found != SCHEMA_VERSION {
        bail!("{}: unsupported schema_version {found}, expected {SCHEMA_VERSION}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct MajorantSummary {
    limit_at_zero: f64,
    slope_at_zero: f64,
    limit_at_end: f64,
    slope_at_end: f64,
    /// `(t, phi(t), phi~(t))` at a few dyadic points.
    samples: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct PhiReport {
    phi: PhiSpec,
    classification: PhiClassification,
    #[serde(skip_serializing_if = "Option::is_none")]
    majorant: Option<MajorantSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    majorant_error: Option<String>,
    quasinorm_constants: [QuasinormConstant; 2],
}

fn sample_points(length: f64) -> Vec<f64> {
    if length.is_finite() {
        (1..=8).map(|k| length * 2f64.powi(-k)).collect()
    } else {
        (-4..=4).map(|k| 2f64.powi(k)).collect()
    }
}

fn phi_report(phi: &PhiSpec, policy: &NumericPolicy, sink: &Sink) -> Result<Status> {
    let classification = classify_phi(phi, policy)?;
    let (majorant, majorant_error) = match Majorant::new(phi) {
        Ok(maj) => {
            let samples = sample_points(phi.length())
                .into_iter()
                .map(|t| [t, phi.value(t), maj.value(t)])
                .collect();
            let summary = MajorantSummary {
                limit_at_zero: maj.limit_at_zero(),
                slope_at_zero: maj.slope_at_zero(),
                limit_at_end: maj.limit_at_end(),
                slope_at_end: maj.slope_at_end(),
                samples,
            };
            (Some(summary), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let report = PhiReport {
        phi: phi.clone(),
        classification,
        majorant,
        majorant_error,
        quasinorm_constants: [
            quasinorm_constant_y(phi, Space::SmallM, policy),
            quasinorm_constant_y(phi, Space::BigM, policy),
        ],
    };
    sink.json("phi", &report)?;
    Ok(Status::Pass)
}

#[derive(Serialize)]
#[serde(bound = "")]
struct RearrangeReport<V: Scalar> {
    #[serde(rename = "L")]
    length: String,
    support: String,
    l1_norm: marclab::rational::NumOrStr,
    rearrangement: marclab::DecreasingProfile<V>,
    maximal: marclab::MaximalProfile<V>,
}

fn rearrange<V: Scalar>(path: &Path, sink: &Sink) -> Result<Status> {
    let f: StepFunction<V> = read_json(path)?;
    let report = RearrangeReport {
        length: f.length().to_string(),
        support: format_rational(&f.total_measure()),
        l1_norm: f.l1_norm().to_json(),
        rearrangement: f.rearrangement(),
        maximal: f.maximal_rearrangement(),
    };
    sink.json("rearrange", &report)?;
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct NormReport {
    #[serde(rename = "m", skip_serializing_if = "Option::is_none")]
    small: Option<NormResult>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    big: Option<NormResult>,
}

fn norm_report(phi: &PhiSpec, path: &Path, space: Option<Space>, policy: &NumericPolicy, sink: &Sink) -> Result<Status> {
    let f: StepFunction<f64> = read_json(path)?;
    let wants = |s: Space| space.is_none_or(|x| x == s);
    let report = NormReport {
        small: wants(Space::SmallM).then(|| norm_m_phi(&f, phi)),
        big: wants(Space::BigM).then(|| norm_big_m_phi_checked(&f, phi, policy)),
    };
    sink.json("norm", &report)?;
    Ok(Status::Pass)
}

/// `a..b` (inclusive) or a single size.
fn parse_sizes(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let parse = |x: &str| x.trim().parse::<usize>().with_context(|| format!("bad family size {x:?} in {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok(parse(a)?..=parse(b)?)
        }
        None => {
            let n = parse(s)?;
            Ok(n..=n)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn superadd(
    space: Space,
    phi: &PhiSpec,
    sizes: &str,
    gammas: &[f64],
    t0: Option<f64>,
    svg: Option<&Path>,
    policy: &NumericPolicy,
    sink: &Sink,
) -> Result<Status> {
    let sizes = parse_sizes(sizes)?;
    if sizes.contains(&0) {
        bail!("family sizes start at 1");
    }
    let t0 = t0.unwrap_or_else(|| phi.length().min(1.0));
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for m in sizes {
        let fam = gen_counterexample(space, phi, m, t0, policy)?;
        for (i, &gamma) in gammas.iter().enumerate() {
            let d = superadditivity_defect(&fam, phi, gamma, policy)?;
            if i == 0 {
                curve.push((m as f64, d.defect));
            }
            rows.push(vec![m.to_string(), format_float(gamma), format_float(d.sum_norm), format_float(d.defect)]);
        }
    }
    let text = csv_text(&["m", "gamma", "sum_norm", "defect"], rows)?;
    if let Some(path) = svg {
        write_file(path, sparkline_svg(&curve).as_bytes())?;
    }
    sink.write_bytes(text.as_bytes())?;
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct PackReport {
    pass: bool,
    packing: Packing,
    checks: Vec<NamedCheck>,
}

fn pack(n: u32, t1: Option<f64>, ratio: Option<&str>, side: &str, center: &[String], sink: &Sink) -> Result<Status> {
    if n == 0 {
        bail!("dimension must be at least 1");
    }
    let side: Measure = parse_rational(side)?;
    let center: Vec<Measure> = if center.is_empty() {
        vec![&side / Measure::from_integer(2.into()); n as usize]
    } else {
        center.iter().map(|c| parse_rational(c)).collect::<marclab::Result<_>>()?
    };
    if center.len() != n as usize {
        bail!("--center has {} coordinates but --n is {n}", center.len());
    }
    let cube = Cube::new(center, side)?;
    let size = match (t1, ratio) {
        (_, Some(r)) => BallSize::Ratio(parse_rational(r)?),
        (Some(t), None) => BallSize::Volume(t),
        (None, None) => bail!("give --t1 or --ratio"),
    };
    let packing = build_packing(&cube, &size)?;
    let report = verify_packing(&packing);
    let out = PackReport {
        pass: report.pass(),
        packing,
        checks: report.checks,
    };
    sink.json("pack", &out)?;
    Ok(status(out.pass))
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum GeneratorSpec {
    IndicatorPacking(IndicatorPacking),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralFile {
    schema_version: u32,
    certificate: GeneralLowerCertificate,
    generator: GeneratorSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertFile<C> {
    schema_version: u32,
    certificate: C,
}

fn load_cert<C: DeserializeOwned>(path: &Path) -> Result<C> {
    let file: CertFile<C> = read_json(path)?;
    check_schema(file.schema_version, path)?;
    Ok(file.certificate)
}

fn certify(kind: CertifyKind, policy: &NumericPolicy, sink: &Sink) -> Result<Status> {
    let (name, verdict, trace_path): (&str, Verdict, _) = match kind {
        CertifyKind::General {
            cert,
            kmax,
            eps,
            trace_csv,
        } => {
            let file: GeneralFile = read_json(&cert)?;
            check_schema(file.schema_version, &cert)?;
            let GeneratorSpec::IndicatorPacking(gen) = file.generator;
            let v = verify_general_lower_certificate(&file.certificate, &gen, kmax, &eps, policy)?;
            ("certify general", v, trace_csv)
        }
        CertifyKind::Alt { cert, trace_csv } => {
            let c: AltCertificate = load_cert(&cert)?;
            ("certify alt", alt_certificate_check(&c, policy)?, trace_csv)
        }
        CertifyKind::Linf { cert, trace_csv } => {
            let c: LinfCertificate = load_cert(&cert)?;
            ("certify linf", linf_lower_certificate(&c)?, trace_csv)
        }
    };
    if let Some(path) = trace_path {
        write_file(&path, trace_csv(&verdict.trace)?.as_bytes())?;
    }
    sink.json(name, &verdict)?;
    Ok(status(verdict.pass()))
}

#[derive(Serialize)]
struct WitnessReport {
    pass: bool,
    params: AltWitnessParams,
    checks: Vec<NamedCheck>,
}

fn witness_params(
    phi: &PhiSpec,
    space: Space,
    norm_t: f64,
    lambda: f64,
    centers: u64,
    policy: &NumericPolicy,
    sink: &Sink,
) -> Result<Status> {
    let params = alt_witness_params(phi, space, norm_t, lambda, centers, policy)?;
    let checks = verify_alt_witness_params(phi, &params, policy)?;
    let report = WitnessReport {
        pass: checks.iter().all(|c| c.pass),
        params,
        checks,
    };
    sink.json("witness-params", &report)?;
    Ok(status(report.pass))
}
