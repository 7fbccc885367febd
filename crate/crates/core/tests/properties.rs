use mop_lattice::io::{field_csv, field_json, moments_json, read_field_csv, read_field_json, read_moments_json};
use mop_lattice::recurrence::{extract_coeffs, generate_table};
use mop_lattice::{
    check_curvature, family_field, hermite_moments, propagate, zero_curvature_residual, DoubleDouble, Exec, FamilySpec,
    MomentPair, PathPolicy, Window,
};
use proptest::prelude::*;

fn meixner_spec() -> impl Strategy<Value = FamilySpec> {
    (0.3f64..4.0, 0.05f64..0.9, 0.05f64..0.9)
        .prop_filter("distinct c", |(_, c1, c2)| (c1 - c2).abs() > 0.05)
        .prop_map(|(beta, c1, c2)| FamilySpec::Meixner1 { beta, c1, c2 })
}

fn hermite_spec() -> impl Strategy<Value = FamilySpec> {
    (-3.0f64..3.0, -3.0f64..3.0)
        .prop_filter("distinct c", |(c1, c2)| (c1 - c2).abs() > 0.1)
        .prop_map(|(c1, c2)| FamilySpec::Hermite { c1, c2 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_fields_are_consistent(spec in prop_oneof![hermite_spec(), meixner_spec()]) {
        let w = Window::new(4, 4);
        let field = family_field::<f64>(&spec, w).unwrap();
        let scale = field.c().values().chain(field.d().values()).fold(1.0f64, |m, v| m.max(v.abs()));
        let curvature = check_curvature(&field, 1e-9 * scale * scale).unwrap();
        prop_assert!(curvature.pass, "{spec}: {}", curvature.max_residual);
        let lax = zero_curvature_residual(&field, w, &[0.0, 1.0, -1.0], Exec::Sequential).unwrap();
        prop_assert!(lax.max_residual <= 1e-9 * scale.powi(3), "{spec}: {}", lax.max_residual);
    }

    #[test]
    fn paths_agree_on_consistent_fields(spec in meixner_spec(), z in -3.0f64..3.0) {
        let w = Window::new(4, 4);
        let field = family_field::<f64>(&spec, w).unwrap();
        let wave = propagate(&field, z, w, PathPolicy::Both, 1e-8).unwrap();
        prop_assert!(wave.path_discrepancy.unwrap() <= 1e-8);
    }

    #[test]
    fn generate_then_extract_round_trips(spec in prop_oneof![hermite_spec(), meixner_spec()]) {
        let w = Window::new(4, 4);
        let field = family_field::<f64>(&spec, w).unwrap();
        let (table, _) = generate_table(&field, w).unwrap();
        let back = extract_coeffs(&table).unwrap();
        let expected = field.restrict(back.window()).unwrap();
        prop_assert!(back.max_rel_diff(&expected) < 1e-8, "{spec}: {}", back.max_rel_diff(&expected));
    }

    #[test]
    fn sequential_and_parallel_generation_agree(spec in meixner_spec()) {
        let w = Window::new(5, 5);
        let field = family_field::<f64>(&spec, w).unwrap();
        let opts = |exec| mop_lattice::recurrence::GenerateOptions { exec, ..Default::default() };
        let (seq, _) = mop_lattice::recurrence::generate_table_with(&field, w, &opts(Exec::Sequential)).unwrap();
        let (par, _) = mop_lattice::recurrence::generate_table_with(&field, w, &opts(Exec::Parallel)).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn field_serialization_round_trips(spec in meixner_spec()) {
        let field = family_field::<f64>(&spec, Window::new(3, 2)).unwrap();
        let json = serde_json::to_string(&field_json(&field)).unwrap();
        prop_assert_eq!(&read_field_json(&json).unwrap(), &field);
        let csv = field_csv(&field).unwrap();
        prop_assert_eq!(&read_field_csv(&csv).unwrap(), &field);
    }

    #[test]
    fn moment_serialization_round_trips(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let pair = MomentPair::new(hermite_moments::<f64>(c1, 9), hermite_moments::<f64>(c2, 9)).unwrap();
        let json = serde_json::to_string(&moments_json(&pair)).unwrap();
        let back = read_moments_json(&json).unwrap();
        // Values survive exactly; the provenance tag becomes raw.
        prop_assert_eq!(back.mu1.values(), pair.mu1.values());
        prop_assert_eq!(back.mu2.values(), pair.mu2.values());
    }

    #[test]
    fn double_double_arithmetic_is_exact_on_splits(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let (a, b) = (DoubleDouble::from(x), DoubleDouble::from(y));
        // Sum and product of two doubles are exactly representable as double-doubles.
        prop_assert_eq!(((a + b) - b).hi(), x);
        let p = a * b;
        let exact_lo = x.mul_add(y, -p.hi());
        prop_assert_eq!(p.lo(), exact_lo);
        if y != 0.0 {
            let q = (a / b) * b - a;
            prop_assert!(q.hi().abs() <= 1e-30 * x.abs().max(1.0));
        }
    }
}

#[test]
fn window_indices_round_trip() {
    let w = Window::new(4, 2);
    for (i, (n, m)) in w.indices().into_iter().enumerate() {
        assert_eq!(w.site(w.linear(n, m)), (n, m));
        assert!(i < w.sites());
    }
}
