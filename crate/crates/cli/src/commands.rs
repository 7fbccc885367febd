use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mop_lattice::curvature::{cell_system, ReconstructOptions};
use mop_lattice::io::{
    field_csv, field_json, format_float, grid_value, matrix_csv, moments_json, num, operator_triplets_json, opt_num,
    partial_field_json, poly_table_csv, poly_table_json, read_field_csv, read_field_json, read_moments_json,
    read_qab_json, to_pretty, wave_json, write_text, Report,
};
use mop_lattice::mop_table::{determinantal_table_with, orthogonality_residual, required_orders, TableOptions};
use mop_lattice::operators::asymmetry;
use mop_lattice::recurrence::{generate_table_with, GenerateOptions};
use mop_lattice::{
    boundary_jacobi, boundary_moments, build_cross, build_delta, build_delta_s, build_h1, build_h2, check_curvature,
    check_symmetrizable, degeneracy_scan, eigencheck, family_field, family_moment_pair, propagate, reconstruct_cd,
    zero_curvature_residual, CoeffField, DoubleDouble, Error, Exec, FamilySpec, Grid, LatticeOperator, MomentPair,
    OperatorKind, PolyTable, Real, SymmetrizeOptions, Window,
};
use serde_json::{json, Map, Value};

use crate::args::{
    Command, Common, Format, GenerateArgs, LaxArgs, MomentsArgs, OperatorArgs, PrecisionArg, ReconstructArgs, Route,
    VerifyArgs,
};

/// An error plus whatever the command had already measured.
pub struct Failure {
    pub error: Error,
    pub partial: Option<Box<Report>>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, partial: None }
    }
}

type Outcome = std::result::Result<Report, Failure>;

fn fail_with(report: Report, error: Error) -> Failure {
    Failure {
        error,
        partial: Some(Box::new(report)),
    }
}

pub fn run(cmd: &Command) -> Outcome {
    let precision = cmd.common().precision;
    match (cmd, precision) {
        (Command::Generate(a), PrecisionArg::Double) => generate::<f64>(a),
        (Command::Generate(a), PrecisionArg::Extended) => generate::<DoubleDouble>(a),
        (Command::Verify(a), PrecisionArg::Double) => verify::<f64>(a),
        (Command::Verify(a), PrecisionArg::Extended) => verify::<DoubleDouble>(a),
        (Command::Operator(a), PrecisionArg::Double) => operator::<f64>(a),
        (Command::Operator(a), PrecisionArg::Extended) => operator::<DoubleDouble>(a),
        (Command::Lax(a), PrecisionArg::Double) => lax::<f64>(a),
        (Command::Lax(a), PrecisionArg::Extended) => lax::<DoubleDouble>(a),
        (Command::Reconstruct(a), PrecisionArg::Double) => reconstruct::<f64>(a),
        (Command::Reconstruct(a), PrecisionArg::Extended) => reconstruct::<DoubleDouble>(a),
        (Command::Moments(a), PrecisionArg::Double) => moments::<f64>(a),
        (Command::Moments(a), PrecisionArg::Extended) => moments::<DoubleDouble>(a),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn read(path: &Path) -> mop_lattice::Result<String> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::Parse(format!("{} is empty", path.display())));
    }
    Ok(text)
}

fn precision_name(p: PrecisionArg) -> &'static str {
    match p {
        PrecisionArg::Double => "double",
        PrecisionArg::Extended => "extended",
    }
}

/// Family from `--params-json` and the parameter flags, or `None` when no
/// family was named.
fn family(common: &Common) -> mop_lattice::Result<Option<FamilySpec>> {
    let mut name = common.family.clone();
    let mut params = BTreeMap::new();
    if let Some(path) = &common.params_json {
        let spec = FamilySpec::from_json(&read(path)?)?;
        if let Some(n) = &name {
            if n != spec.name() {
                return Err(Error::InvalidParams(format!(
                    "--family {n} conflicts with `{}` in {}",
                    spec.name(),
                    path.display()
                )));
            }
        }
        name = Some(spec.name().to_string());
        params = spec.params();
    }
    let flags = [
        ("c1", common.c1),
        ("c2", common.c2),
        ("alpha1", common.alpha1),
        ("alpha2", common.alpha2),
        ("beta", common.beta),
        ("u0", common.u0),
        ("v0", common.v0),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            params.insert(k.to_string(), v);
        }
    }
    match name {
        Some(name) => Ok(Some(FamilySpec::from_params(&name, &params)?)),
        None if !params.is_empty() => Err(Error::InvalidParams("family parameters given without --family".into())),
        None => Ok(None),
    }
}

fn explicit_window(common: &Common) -> Option<Window> {
    common.window.as_ref().map(|w| Window::new(w[0], w[1]))
}

fn read_field(path: &Path) -> mop_lattice::Result<CoeffField<f64>> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_field_csv(&text)
    } else {
        read_field_json(&text)
    }
}

/// `{"family": ..., "params": {...}}` with report-style numbers.
fn spec_value(spec: &FamilySpec) -> Value {
    let params: Map<String, Value> = spec.params().into_iter().map(|(k, v)| (k, num(v))).collect();
    json!({ "family": spec.name(), "params": params })
}

/// Where a coefficient field came from, for the report.
fn source_value(spec: Option<&FamilySpec>, common: &Common) -> Value {
    match (spec, &common.field) {
        (_, Some(path)) => json!({ "field": path.display().to_string() }),
        (Some(spec), None) => spec_value(spec),
        (None, None) => Value::Null,
    }
}

/// The coefficient field selected by `--field` or the family flags.
fn field<T: Real>(common: &Common) -> mop_lattice::Result<(CoeffField<T>, Option<FamilySpec>)> {
    let spec = family(common)?;
    if let Some(path) = &common.field {
        if spec.is_some() {
            return Err(usage("--field and --family are mutually exclusive"));
        }
        let f = read_field(path)?;
        let f = match explicit_window(common) {
            Some(w) => f
                .restrict(w)
                .ok_or_else(|| Error::Shape(format!("window {w:?} is not inside the field window {:?}", f.window())))?,
            None => f,
        };
        return Ok((f.cast(), None));
    }
    let spec = spec.ok_or_else(|| usage("either --family or --field is required"))?;
    let w = explicit_window(common).unwrap_or(Window::new(3, 3));
    Ok((family_field::<T>(&spec, w)?, Some(spec)))
}

fn out_path(common: &Common, tag: Option<&str>) -> Option<PathBuf> {
    let out = common.out.as_ref()?;
    let Some(tag) = tag else {
        return Some(out.clone());
    };
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    Some(out.with_file_name(name))
}

fn emit(report: &mut Report, path: Option<PathBuf>, text: &str) -> mop_lattice::Result<()> {
    if let Some(path) = path {
        write_text(&path, text)?;
        report.artifacts.push(path.display().to_string());
    }
    Ok(())
}

fn samples_value(z: &[f64]) -> Value {
    Value::Array(z.iter().map(|&v| num(v)).collect())
}

fn index_value(idx: (usize, usize)) -> Value {
    json!([idx.0, idx.1])
}

// ---------------------------------------------------------------- generate

fn generate<T: Real>(args: &GenerateArgs) -> Outcome {
    let common = &args.common;
    let mut report = Report::new("generate");
    let spec = family(common)?;
    let w = explicit_window(common).unwrap_or(Window::new(3, 3));
    report
        .detail("window", index_value((w.n, w.m)))
        .detail("precision", precision_name(common.precision).into())
        .detail(
            "route",
            match args.route {
                Route::Determinant => "determinant",
                Route::Recurrence => "recurrence",
                Route::Both => "both",
            }
            .into(),
        );

    let pair: Option<MomentPair<T>> = match (&args.moments, &spec) {
        (Some(_), Some(_)) => return Err(usage("--moments and --family are mutually exclusive").into()),
        (Some(path), None) => {
            report.detail("source", json!({ "moments": path.display().to_string() }));
            Some(read_moments_json(&read(path)?)?.cast())
        }
        (None, Some(spec)) => {
            report.detail("source", spec_value(spec));
            if args.route == Route::Recurrence {
                None
            } else {
                let (o1, o2) = required_orders(w);
                Some(family_moment_pair::<T>(spec, o1.max(o2))?)
            }
        }
        (None, None) => return Err(usage("either --family or --moments is required").into()),
    };

    let det_table = match &pair {
        Some(pair) => {
            let opts = TableOptions {
                threshold: common
                    .tol_normality
                    .unwrap_or(T::PRECISION.default_normality_threshold()),
                exec: Exec::default(),
            };
            let table = determinantal_table_with(pair, w, &opts).map_err(|e| fail_with(report.clone(), e))?;
            let orth = w
                .indices()
                .into_iter()
                .map(|(n, m)| orthogonality_residual(pair, table.get(n, m), n, m))
                .fold(0.0f64, f64::max);
            report.residual("orthogonality", orth);
            Some(table)
        }
        None => None,
    };

    let rec_table = if args.route == Route::Determinant {
        if args.coeffs_out.is_some() {
            return Err(usage("--coeffs-out needs the recurrence route").into());
        }
        None
    } else {
        let spec = spec
            .as_ref()
            .ok_or_else(|| usage("the recurrence route needs a family; use --route determinant with --moments"))?;
        let f = family_field::<T>(spec, w).map_err(|e| fail_with(report.clone(), e))?;
        let (table, gen) =
            generate_table_with(&f, w, &GenerateOptions::default()).map_err(|e| fail_with(report.clone(), e))?;
        report.residual("route_discrepancy", gen.max_discrepancy);
        let text = match common.format {
            Format::Json => to_pretty(&field_json(&f)),
            Format::Csv => field_csv(&f)?,
        };
        emit(&mut report, args.coeffs_out.clone(), &text)?;
        Some(table)
    };

    if let (Some(d), Some(r)) = (&det_table, &rec_table) {
        let diff = d.max_rel_diff(r);
        report.residual("route_difference", diff);
        report.detail("tol_route", num(args.tol_route));
        report.pass = diff <= args.tol_route;
    }

    let table: &PolyTable<T> = det_table
        .as_ref()
        .or(rec_table.as_ref())
        .expect("at least one route ran");
    let text = match common.format {
        Format::Json => to_pretty(&poly_table_json(table)),
        Format::Csv => poly_table_csv(table)?,
    };
    emit(&mut report, out_path(common, None), &text)?;
    Ok(report)
}

// ------------------------------------------------------------------ verify

fn verify<T: Real>(args: &VerifyArgs) -> Outcome {
    let common = &args.common;
    let (f, spec) = field::<T>(common)?;
    let mut report = Report::new("verify");
    let w = f.window();
    report
        .detail("source", source_value(spec.as_ref(), common))
        .detail("window", index_value((w.n, w.m)))
        .detail("precision", precision_name(common.precision).into());

    let curvature = check_curvature(&f, common.tol_curvature).map_err(|e| fail_with(report.clone(), e))?;
    let [r31, r32, r33, r34] = curvature.maxima();
    report
        .residual("curvature", curvature.max_residual)
        .residual("residual_31", r31)
        .residual("residual_32", r32)
        .residual("residual_33", r33)
        .residual("residual_34", r34);

    let degeneracy = degeneracy_scan(&f, common.tol_degeneracy);
    let symmetry = check_symmetrizable(&f, 1e-10);
    report.residual("symmetry", symmetry.max_residual);
    report
        .detail("curvature_pass", curvature.pass.into())
        .detail("tol_curvature", num(common.tol_curvature))
        .detail(
            "degeneracy",
            json!({
                "D": grid_value(&degeneracy.dvals, |v| opt_num(*v)),
                "degenerate": degeneracy.all_degenerate(),
                "nondegenerate": degeneracy.all_nondegenerate(),
                "tolerance": num(common.tol_degeneracy),
            }),
        )
        .detail("symmetrizable", symmetry.symmetrizable.into());
    report.pass = curvature.pass;

    let text = match common.format {
        Format::Json => {
            let mut obj = Map::new();
            for (k, g) in [
                ("residual_31", &curvature.residual_31),
                ("residual_32", &curvature.residual_32),
                ("residual_33", &curvature.residual_33),
                ("residual_34", &curvature.residual_34),
            ] {
                obj.insert(k.into(), grid_value(g, |v| opt_num(*v)));
            }
            obj.insert("D".into(), grid_value(&degeneracy.dvals, |v| opt_num(*v)));
            to_pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let cell = |v: Option<f64>| v.map(format_float).unwrap_or_default();
            let mut s = String::from("n,m,residual_31,residual_32,residual_33,residual_34,D\n");
            for (n, m) in w.indices() {
                let _ = writeln!(
                    s,
                    "{n},{m},{},{},{},{},{}",
                    cell(curvature.residual_31[(n, m)]),
                    cell(curvature.residual_32[(n, m)]),
                    cell(curvature.residual_33[(n, m)]),
                    cell(curvature.residual_34[(n, m)]),
                    cell(degeneracy.dvals.get(n, m).copied().flatten()),
                );
            }
            s
        }
    };
    emit(&mut report, out_path(common, None), &text)?;
    Ok(report)
}

// ---------------------------------------------------------------- operator

fn operator<T: Real>(args: &OperatorArgs) -> Outcome {
    let common = &args.common;
    let (f, spec) = field::<T>(common)?;
    let w = f.window();
    let mut report = Report::new("operator");
    report
        .detail("source", source_value(spec.as_ref(), common))
        .detail("window", index_value((w.n, w.m)))
        .detail("precision", precision_name(common.precision).into())
        .detail(
            "kinds",
            Value::Array(args.kind.iter().map(|k| k.name().into()).collect()),
        );

    let needs_sym = args
        .kind
        .iter()
        .any(|k| matches!(k, OperatorKind::DeltaS | OperatorKind::J1 | OperatorKind::J2));
    let decomposition = if needs_sym {
        Some(build_delta_s(&f, &SymmetrizeOptions::default()).map_err(|e| fail_with(report.clone(), e))?)
    } else {
        None
    };
    let table = match &args.eigencheck {
        Some(_) => Some(
            generate_table_with(&f, w, &GenerateOptions::default())
                .map_err(|e| fail_with(report.clone(), e))?
                .0,
        ),
        None => None,
    };

    let tag_kinds = args.kind.len() > 1;
    let mut eigen = Map::new();
    for &kind in &args.kind {
        let op: LatticeOperator<T> = match kind {
            OperatorKind::H1 => build_h1(&f),
            OperatorKind::H2 => build_h2(&f),
            OperatorKind::Delta => build_delta(&f),
            OperatorKind::Cross => {
                let q = Grid::from_fn(w, |n, m| f.q(n, m));
                build_cross(&q, f.a(), f.b())?
            }
            OperatorKind::DeltaS => decomposition.as_ref().expect("built above").delta_s.clone(),
            OperatorKind::J1 => decomposition.as_ref().expect("built above").j1.clone(),
            OperatorKind::J2 => decomposition.as_ref().expect("built above").j2.clone(),
        };
        let text = match common.format {
            Format::Json => to_pretty(&operator_triplets_json(&op)),
            Format::Csv => matrix_csv(&op.to_dense())?,
        };
        emit(&mut report, out_path(common, tag_kinds.then(|| kind.name())), &text)?;

        if kind.is_symmetric() {
            let asym = asymmetry(&op.to_dense());
            report.residual(&format!("{}_asymmetry", kind.name()), asym);
            report.pass &= asym <= args.tol_symmetry;
        }
        if let (Some(samples), Some(table)) = (&args.eigencheck, &table) {
            let scaling = match kind {
                OperatorKind::J1 | OperatorKind::J2 => continue,
                OperatorKind::DeltaS => Some(&decomposition.as_ref().expect("built above").symmetrizer),
                _ => None,
            };
            let check = eigencheck(&op, table, samples, scaling, Exec::default())?;
            report.residual(&format!("{}_eigencheck", kind.name()), check.max_residual);
            report.pass &= check.max_residual <= common.tol_eigencheck;
            eigen.insert(
                kind.name().into(),
                json!({
                    "samples": samples_value(&check.samples),
                    "residuals": samples_value(&check.residuals),
                    "interior_sites": check.interior.len(),
                }),
            );
        }
    }
    if let Some(samples) = &args.eigencheck {
        report
            .detail("eigencheck_samples", samples_value(samples))
            .detail("tol_eigencheck", num(common.tol_eigencheck))
            .detail("eigencheck", Value::Object(eigen));
    }
    Ok(report)
}

// --------------------------------------------------------------------- lax

fn lax<T: Real>(args: &LaxArgs) -> Outcome {
    let common = &args.common;
    let (f, spec) = field::<T>(common)?;
    let w = f.window();
    let mut report = Report::new("lax");
    report
        .detail("source", source_value(spec.as_ref(), common))
        .detail("window", index_value((w.n, w.m)))
        .detail("precision", precision_name(common.precision).into())
        .detail("samples", samples_value(&common.z));

    let zc = zero_curvature_residual(&f, w, &common.z, Exec::default())?;
    report.residual("zero_curvature", zc.max_residual);
    report.detail("tol_curvature", num(common.tol_curvature));
    report.pass = zc.max_residual <= common.tol_curvature;

    let mut waves = Vec::with_capacity(common.z.len());
    let mut worst_path = 0.0f64;
    for &z in &common.z {
        match propagate(&f, T::from_f64(z), w, args.path, common.tol_path) {
            Ok(wave) => {
                if let Some(d) = wave.path_discrepancy {
                    worst_path = worst_path.max(d);
                }
                waves.push(wave);
            }
            Err(e @ Error::PathInconsistent { .. }) => {
                if let Error::PathInconsistent { discrepancy, .. } = e {
                    report.residual("path_discrepancy", discrepancy);
                }
                return Err(fail_with(report, e));
            }
            Err(e) => return Err(fail_with(report, e)),
        }
    }
    if args.path == mop_lattice::PathPolicy::Both {
        report.residual("path_discrepancy", worst_path);
        report.detail("tol_path", num(common.tol_path));
    }

    let text = match common.format {
        Format::Json => to_pretty(&Value::Array(waves.iter().map(wave_json).collect())),
        Format::Csv => {
            let mut s = String::from("z,n,m,psi0,psi1,psi2\n");
            for wave in &waves {
                for ((n, m), p) in wave.psi.iter() {
                    let _ = writeln!(
                        s,
                        "{},{n},{m},{},{},{}",
                        format_float(wave.z.to_f64()),
                        format_float(p[0].to_f64()),
                        format_float(p[1].to_f64()),
                        format_float(p[2].to_f64())
                    );
                }
            }
            s
        }
    };
    emit(&mut report, out_path(common, None), &text)?;
    Ok(report)
}

// ------------------------------------------------------------- reconstruct

fn reconstruct<T: Real>(args: &ReconstructArgs) -> Outcome {
    let common = &args.common;
    let mut report = Report::new("reconstruct");
    let spec = family(common)?;
    let (q, a, b, reference) = match (&args.input, &spec) {
        (Some(_), Some(_)) => return Err(usage("--input and --family are mutually exclusive").into()),
        (Some(path), None) => {
            report.detail("source", json!({ "input": path.display().to_string() }));
            let (q, a, b) = read_qab_json(&read(path)?)?;
            (
                q.map(|&v| T::from_f64(v)),
                a.map(|&v| T::from_f64(v)),
                b.map(|&v| T::from_f64(v)),
                None,
            )
        }
        (None, Some(spec)) => {
            report.detail("source", spec_value(spec));
            let w = explicit_window(common).unwrap_or(Window::new(3, 3));
            let f = family_field::<T>(spec, w)?;
            let q = Grid::from_fn(w, |n, m| f.q(n, m));
            (q, f.a().clone(), f.b().clone(), Some(f))
        }
        (None, None) => return Err(usage("either --input or --family is required").into()),
    };
    let w = q.window();
    report
        .detail("window", index_value((w.n, w.m)))
        .detail("precision", precision_name(common.precision).into());

    let opts = ReconstructOptions {
        degeneracy_tolerance: common.tol_degeneracy,
        consistency_tolerance: args.tol_consistency,
        exec: Exec::default(),
    };
    let rec = match reconstruct_cd(&q, &a, &b, &opts) {
        Ok(r) => r,
        Err(e) => {
            if let Error::DegenerateSystem { cell, det } = &e {
                report.detail(
                    "degenerate_cell",
                    json!({ "cell": index_value(*cell), "det": num(*det) }),
                );
                // Report the determinant at every cell so the degeneracy pattern is visible.
                if let Some(inner) = w.shrink() {
                    let dets = Grid::from_fn(inner, |n, m| {
                        cell_system(&q, &a, &b, n, m)
                            .map_or(f64::NAN, |(sys, _)| mop_lattice::linalg::det(&sys).to_f64())
                    });
                    report.detail("determinants", grid_value(&dets, |v| num(*v)));
                }
            }
            return Err(fail_with(report, e));
        }
    };
    report
        .residual("overlap_consistency", rec.consistency)
        .detail("determinants", grid_value(&rec.determinants, |v| num(*v)));
    if let Some(f) = &reference {
        let mut err = 0.0f64;
        for (n, m) in w.indices() {
            for (got, want) in [(rec.c[(n, m)], f.c()[(n, m)]), (rec.d[(n, m)], f.d()[(n, m)])] {
                if let Some(got) = got {
                    let want = want.to_f64();
                    err = err.max((got.to_f64() - want).abs() / want.abs().max(1.0));
                }
            }
        }
        report.residual("reference_error", err);
    }

    let c = rec.c.map(|v| v.map(|x| x.to_f64()));
    let d = rec.d.map(|v| v.map(|x| x.to_f64()));
    let a64 = a.map(|v| v.to_f64());
    let b64 = b.map(|v| v.to_f64());
    let text = match common.format {
        Format::Json => to_pretty(&partial_field_json(&c, &d, &a64, &b64)),
        Format::Csv => {
            let cell = |v: Option<f64>| v.map(format_float).unwrap_or_default();
            let mut s = String::from("n,m,a,b,c,d\n");
            for (n, m) in w.indices() {
                let _ = writeln!(
                    s,
                    "{n},{m},{},{},{},{}",
                    format_float(a64[(n, m)]),
                    format_float(b64[(n, m)]),
                    cell(c[(n, m)]),
                    cell(d[(n, m)])
                );
            }
            s
        }
    };
    emit(&mut report, out_path(common, None), &text)?;
    Ok(report)
}

// ----------------------------------------------------------------- moments

fn moments<T: Real>(args: &MomentsArgs) -> Outcome {
    let common = &args.common;
    let mut report = Report::new("moments");
    let spec = family(common)?;
    let w = explicit_window(common).unwrap_or(Window::new(3, 3));
    let order = args.order.unwrap_or_else(|| {
        let (o1, o2) = required_orders(w);
        o1.max(o2)
    });
    report
        .detail("order", order.into())
        .detail("precision", precision_name(common.precision).into());

    let pair = match &spec {
        Some(spec) if common.field.is_none() && spec.has_measures() => {
            spec.validate()?;
            report.detail("source", spec_value(spec));
            Some(family_moment_pair::<T>(spec, order)?)
        }
        Some(spec) if common.field.is_none() => {
            report.detail("source", spec_value(spec));
            None
        }
        _ => None,
    };
    if pair.is_none() && args.axis.is_none() {
        return Err(usage("nothing to compute: give a measure-backed family or --axis").into());
    }

    let boundary = match args.axis {
        Some(axis) => {
            let (f, _) = field::<T>(common)?;
            let jac = boundary_jacobi(&f, axis)?;
            let seq = boundary_moments(&jac, order)?;
            report.detail("axis", (if axis == mop_lattice::Axis::First { 1 } else { 2 }).into());
            if let Some(pair) = &pair {
                let target = if axis == mop_lattice::Axis::First {
                    &pair.mu1
                } else {
                    &pair.mu2
                };
                let err = seq
                    .values()
                    .iter()
                    .zip(target.values())
                    .map(|(x, y)| (x.to_f64() - y.to_f64()).abs() / y.to_f64().abs().max(1.0))
                    .fold(0.0f64, f64::max);
                report.residual("boundary_moments", err);
                report.detail("tol_moments", num(args.tol_moments));
                report.pass = err <= args.tol_moments;
            }
            Some(seq)
        }
        None => None,
    };

    let text = match common.format {
        Format::Json => {
            let mut obj = match &pair {
                Some(pair) => match moments_json(pair) {
                    Value::Object(o) => o,
                    _ => unreachable!("moments_json returns an object"),
                },
                None => Map::new(),
            };
            if let Some(seq) = &boundary {
                obj.insert(
                    "boundary".into(),
                    Value::Array(seq.values().iter().map(|v| num(v.to_f64())).collect()),
                );
            }
            to_pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let mut header = vec!["j"];
            if pair.is_some() {
                header.extend(["mu1", "mu2"]);
            }
            if boundary.is_some() {
                header.push("boundary");
            }
            let mut s = header.join(",");
            s.push('\n');
            for j in 0..=order {
                let mut row = vec![j.to_string()];
                if let Some(p) = &pair {
                    row.push(format_float(p.mu1.values()[j].to_f64()));
                    row.push(format_float(p.mu2.values()[j].to_f64()));
                }
                if let Some(seq) = &boundary {
                    row.push(format_float(seq.values()[j].to_f64()));
                }
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(&mut report, out_path(common, None), &text)?;
    Ok(report)
}
