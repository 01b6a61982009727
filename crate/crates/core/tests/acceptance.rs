//! Acceptance suite: one PASS/FAIL line per criterion, then a single assert
//! over all of them so that every line is printed even when one fails.

mod common;

use common::{random_coefficients, sample, samples_where};
use nalgebra::{DMatrix, DVector};
use spraylab::cli::{run, ScenarioConfig};
use spraylab::jets::{
    euler_defect, fd_oracle, Field, SampleBox, Sampler, ScalarField, TangentSample,
};
use spraylab::linalg::DEFAULT_RANK_REL_TOL;
use spraylab::metrics::{
    affine_pullback_klein, affine_realizability, closed_form, family_metric, flag_curvature,
    funk_metric, funk_residual, hamel_defect, klein_metric, projective_factor_field,
    randers_example, AffineMap, FinslerMetricDef, LambdaParams, Realizability,
};
use spraylab::metrizability::{
    energy_check, holonomy_span, metrizability_verdict, Verdict, VerdictTolerances,
    DEFAULT_HOLONOMY_DEPTH,
};
use spraylab::oneform::{deformation_spray, diagnostics, family_b, OneFormCoefficients};
use spraylab::spray::{
    collinearity_defect, flat_spray, geodesic_integrate, homogeneity_defect, jacobi, jacobi_alt,
    projective_deform, samples, Spray,
};

const SAMPLES: usize = 100;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn coefficient_sets() -> Vec<OneFormCoefficients> {
    let mut v = random_coefficients(2, 5, 2024);
    v.extend(random_coefficients(3, 5, 3035));
    v
}

fn family_samples(c: &OneFormCoefficients, seed: u64) -> Vec<TangentSample> {
    let m = family_metric(c);
    let s = deformation_spray(c);
    samples_where(c.dim(), SAMPLES, seed, |p| m.in_domain(p) && s.in_domain(p))
}

fn planar() -> OneFormCoefficients {
    OneFormCoefficients::new(&[0.0, 1.0, 1.0, 0.0], &[1.0, 1.0], 1.0).unwrap()
}

fn planar_samples() -> Vec<TangentSample> {
    let m = family_metric(&planar());
    let bounds = SampleBox {
        x_intervals: vec![(-0.2, 0.2); 2],
        y_radius: (0.5, 1.5),
        y_signs: Some(vec![1, 1]),
    };
    let set = Sampler::new(bounds, 77).draw_valid(SAMPLES, |p| m.in_domain(p));
    assert_eq!(set.samples.len(), SAMPLES);
    set.samples
}

fn curvature_one(c: &OneFormCoefficients, pts: &[TangentSample]) -> Result<(f64, f64), String> {
    let m = family_metric(c);
    let (mut dk, mut res) = (0.0f64, 0.0f64);
    for p in pts {
        let k = flag_curvature(&m, p).map_err(|e| e.to_string())?;
        dk = dk.max((k.kappa - 1.0).abs());
        res = res.max(k.residual);
    }
    ensure(dk <= 1e-6 && res <= 1e-6, || {
        format!("|κ-1| = {dk:e}, residual {res:e}")
    })?;
    Ok((dk, res))
}

fn criterion_1() -> Outcome {
    let (mut dk, mut res) = (0.0f64, 0.0f64);
    for (i, c) in coefficient_sets().iter().enumerate() {
        let (a, b) = curvature_one(c, &family_samples(c, i as u64))?;
        dk = dk.max(a);
        res = res.max(b);
    }
    Ok(format!(
        "10 sets x {SAMPLES} samples: max |κ-1| = {dk:.1e}, max residual = {res:.1e}"
    ))
}

fn conditions(c: &OneFormCoefficients, pts: &[TangentSample]) -> Result<(f64, f64), String> {
    let d = metrizability_verdict(
        &deformation_spray(c),
        family_b(c).beta(),
        pts,
        VerdictTolerances::default(),
    )
    .map_err(|e| e.to_string())?;
    let n = c.dim();
    ensure(d.dj_alpha_defect <= 1e-8, || {
        format!("(i) defect {:e}", d.dj_alpha_defect)
    })?;
    ensure(d.dh_rho_defect <= 1e-8, || {
        format!("(ii) defect {:e}", d.dh_rho_defect)
    })?;
    ensure(d.per_sample.iter().all(|s| s.ddj_rho_rank == 2 * n), || {
        format!("min rank {} < {}", d.ddj_rho_rank, 2 * n)
    })?;
    ensure(d.verdict == Verdict::MetrizableCfc, || {
        format!("verdict {}", d.verdict)
    })?;
    Ok((d.dj_alpha_defect, d.dh_rho_defect))
}

fn criterion_2() -> Outcome {
    let (mut i1, mut i2) = (0.0f64, 0.0f64);
    for (i, c) in coefficient_sets().iter().enumerate() {
        let (a, b) = conditions(c, &family_samples(c, i as u64))?;
        i1 = i1.max(a);
        i2 = i2.max(b);
    }
    Ok(format!(
        "(i) ≤ {i1:.1e}, (ii) ≤ {i2:.1e}, rank dd_J ρ = 2n everywhere, all METRIZABLE_CFC"
    ))
}

fn criterion_3() -> Outcome {
    let flat = flat_spray(2).unwrap();
    let beta = samples::sum_one_form();
    let s = projective_deform(&flat, &beta).unwrap();
    let pts = samples_where(2, SAMPLES, 31, |_| true);
    let v = metrizability_verdict(&s, &beta, &pts, VerdictTolerances::default())
        .map_err(|e| e.to_string())?
        .verdict;
    ensure(v != Verdict::MetrizableCfc, || {
        "β = y¹+y² judged metrizable".into()
    })?;

    let c = OneFormCoefficients::new(&[0.0; 4], &[1.0, 0.5], 2.0).unwrap();
    let s0 = deformation_spray(&c);
    let b = family_b(&c);
    let pts0 = samples_where(2, SAMPLES, 32, |p| s0.in_domain(p));
    let v0 = metrizability_verdict(&s0, b.beta(), &pts0, VerdictTolerances::default())
        .map_err(|e| e.to_string())?
        .verdict;
    ensure(v0 == Verdict::FailsIii, || format!("C = 0 verdict {v0}"))?;
    for p in &pts0 {
        let r = diagnostics(&b, p)
            .map_err(|e| e.to_string())?
            .regularity_rank;
        ensure(r == 1, || format!("rank(∂b + b⊗b) = {r} at {p:?}"))?;
    }
    Ok(format!(
        "β = y¹+y² → {v}; C = 0 → {v0} with rank(∂_ib_j + b_ib_j) = 1 at all samples"
    ))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for (i, c) in coefficient_sets().iter().enumerate() {
        let m = family_metric(c);
        let s = deformation_spray(c);
        let n = c.dim() as f64;
        for p in family_samples(c, i as u64) {
            let ric = jacobi(&s, &p).map_err(|e| e.to_string())?.ric;
            let f = m.value(&p).map_err(|e| e.to_string())?;
            worst = worst.max((ric - (n - 1.0) * f * f).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("|Tr Φ - (n-1)F²| = {worst:e}"))?;
    let mut lin = 0.0f64;
    for (cv, c0, n) in [(vec![1.0, 0.5], 2.0, 2), (vec![0.3, -0.7, 0.2], 1.5, 3)] {
        let zero = vec![0.0; n * n];
        let cf = OneFormCoefficients::new(&zero, &cv, c0).unwrap();
        let s = deformation_spray(&cf);
        for p in samples_where(n, SAMPLES, 41, |p| s.in_domain(p)) {
            let ric = jacobi(&s, &p).map_err(|e| e.to_string())?.ric;
            let expected =
                closed_form::ricci_linear_family(&cv, c0, &p).map_err(|e| e.to_string())?;
            lin = lin.max((ric - expected).abs());
        }
    }
    ensure(lin <= 1e-10, || format!("C = 0 Ricci mismatch {lin:e}"))?;
    Ok(format!("family: {worst:.1e}; C = 0 closed form: {lin:.1e}"))
}

fn max_hamel(m: &FinslerMetricDef, pts: &[TangentSample]) -> Result<f64, String> {
    pts.iter().try_fold(0.0f64, |w, p| {
        Ok(w.max(hamel_defect(m, p).map_err(|e| e.to_string())?))
    })
}

fn straight_geodesics(s: &Spray, starts: &[TangentSample], t_end: f64) -> Result<f64, String> {
    starts.iter().try_fold(0.0f64, |w, p| {
        let t = geodesic_integrate(s, p.x(), p.y(), t_end, 1000).map_err(|e| e.to_string())?;
        Ok(w.max(collinearity_defect(&t)))
    })
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut bend = 0.0f64;
    for (i, c) in coefficient_sets().iter().enumerate() {
        let pts = family_samples(c, i as u64);
        worst = worst.max(max_hamel(&family_metric(c), &pts)?);
        bend = bend.max(straight_geodesics(&deformation_spray(c), &pts[..3], 1.0)?);
    }
    let lp = LambdaParams::new(1.0, vec![0.3, -0.2], 1.0).unwrap();
    let randers = randers_example(&lp);
    let funk = funk_metric(&lp).map_err(|e| e.to_string())?;
    for (m, seed) in [(&randers, 51), (&klein_metric(2, 1.0), 52), (&funk, 53)] {
        let pts = samples_where(2, SAMPLES, seed, |p| m.in_domain(p));
        worst = worst.max(max_hamel(m, &pts)?);
    }
    let k3 = klein_metric(3, 1.0);
    worst = worst.max(max_hamel(
        &k3,
        &samples_where(3, SAMPLES, 54, |p| k3.in_domain(p)),
    )?);
    ensure(worst <= 1e-8, || format!("Hamel defect {worst:e}"))?;
    ensure(bend <= 1e-6, || format!("collinearity defect {bend:e}"))?;
    Ok(format!(
        "Hamel ≤ {worst:.1e} (family, Randers, Klein, Funk); family geodesics collinear to {bend:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (lp, seed) in [
        (LambdaParams::new(1.0, vec![0.3, -0.2], 1.0).unwrap(), 61),
        (
            LambdaParams::new(2.0, vec![0.0, 0.5, -0.4], 0.7).unwrap(),
            62,
        ),
    ] {
        let m = funk_metric(&lp).map_err(|e| e.to_string())?;
        let pf = projective_factor_field(&m);
        for p in samples_where(lp.dim(), SAMPLES, seed, |p| m.in_domain(p)) {
            let e = |e: spraylab::GeomError| e.to_string();
            let theta = m.value(&p).map_err(e)?;
            let k = flag_curvature(&m, &p).map_err(e)?;
            worst.0 = worst.0.max(funk_residual(&lp, &m, &p).map_err(e)?);
            worst.1 = worst.1.max((pf.value(&p).map_err(e)? - 0.5 * theta).abs());
            worst.2 = worst.2.max((k.kappa + 0.25).abs());
            worst.3 = worst.3.max(k.residual);
        }
    }
    ensure(worst.0 <= 1e-10, || {
        format!("functional residual {:e}", worst.0)
    })?;
    ensure(worst.1 <= 1e-8, || format!("|P - Θ/2| = {:e}", worst.1))?;
    ensure(worst.2 <= 1e-6 && worst.3 <= 1e-6, || {
        format!("|κ + 1/4| = {:e}, residual {:e}", worst.2, worst.3)
    })?;
    Ok(format!(
        "residual {:.1e}, |P - Θ/2| {:.1e}, |κ + 1/4| {:.1e}",
        worst.0, worst.1, worst.2
    ))
}

fn criterion_7() -> Outcome {
    let e = |e: spraylab::GeomError| e.to_string();
    let klein_member = OneFormCoefficients::new(&[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0], 1.0).unwrap();
    let (fam, k1) = (family_metric(&klein_member), klein_metric(2, 1.0));
    let mut pointwise = 0.0f64;
    for p in samples_where(2, SAMPLES, 71, |p| fam.in_domain(p)) {
        pointwise = pointwise.max((fam.value(&p).map_err(e)? - k1.value(&p).map_err(e)?).abs());
    }
    ensure(pointwise <= 1e-12, || {
        format!("family vs Klein {pointwise:e}")
    })?;

    let maps = [
        (vec![1.5, 0.3, -0.2, 0.8], vec![0.4, -0.1]),
        (
            vec![0.7, 0.0, 0.0, 0.0, 1.2, 0.4, 0.1, -0.3, 0.9],
            vec![0.0, 0.5, -0.2],
        ),
    ];
    let mut trip = 0.0f64;
    for (a, b) in maps {
        let n = b.len();
        let map =
            AffineMap::new(DMatrix::from_row_slice(n, n, &a), DVector::from_vec(b)).map_err(e)?;
        let cf = affine_pullback_klein(&map);
        match affine_realizability(&cf) {
            Realizability::Realizable { map: found, scale } => {
                let back = affine_pullback_klein(&found);
                trip = trip
                    .max((back.c_matrix() - cf.c_matrix() * scale).amax())
                    .max((back.c_vector() - cf.c_vector() * scale).amax())
                    .max((back.c_scalar() - cf.c_scalar() * scale).abs());
                let gram = found.a().transpose() * found.a();
                trip = trip.max((gram - map.a().transpose() * map.a()).amax());
            }
            other => return Err(format!("pullback reported {other:?}")),
        }
    }
    ensure(trip <= 1e-12, || format!("round trip defect {trip:e}"))?;

    let pl = planar();
    ensure(!affine_realizability(&pl).is_realizable(), || {
        "planar member realizable".into()
    })?;
    let pts = planar_samples();
    curvature_one(&pl, &pts)?;
    conditions(&pl, &pts)?;
    let h = max_hamel(&family_metric(&pl), &pts)?;
    ensure(h <= 1e-8, || format!("planar Hamel {h:e}"))?;
    // The cone domain is small; a unit-time geodesic leaves it.
    let bend = straight_geodesics(&deformation_spray(&pl), &pts[..3], 0.1)?;
    ensure(bend <= 1e-6, || format!("planar collinearity {bend:e}"))?;
    Ok(format!(
        "F = F₁ to {pointwise:.1e}; round trip {trip:.1e}; planar member not realizable yet passes κ = 1, (i)-(iii), Hamel, straight geodesics"
    ))
}

fn criterion_8() -> Outcome {
    let e = |e: spraylab::GeomError| e.to_string();
    let s1 = samples::example1();
    let bounds = SampleBox::new(vec![(-1.0, 1.0), (2.5, 4.0)], (0.5, 1.5)).unwrap();
    let pts = Sampler::new(bounds, 81)
        .draw_valid(20, |p| s1.in_domain(p))
        .samples;
    ensure(pts.len() == 20, || "example1 samples".into())?;
    for p in &pts {
        let r = holonomy_span(&s1, p, DEFAULT_HOLONOMY_DEPTH, DEFAULT_RANK_REL_TOL).map_err(e)?;
        ensure(r.span_rank == 4 && r.liouville_in_span, || {
            format!(
                "example1 rank {} Liouville {}",
                r.span_rank, r.liouville_in_span
            )
        })?;
    }
    let s2 = samples::example2();
    let energy = samples::example2_energy();
    let bounds = SampleBox::new(vec![(-0.5, 0.5), (0.5, 1.5)], (0.5, 1.5)).unwrap();
    let pts2 = Sampler::new(bounds, 82)
        .draw_valid(SAMPLES, |p| s2.in_domain(p))
        .samples;
    let mut res = 0.0f64;
    for p in &pts2 {
        let r = holonomy_span(&s2, p, DEFAULT_HOLONOMY_DEPTH, DEFAULT_RANK_REL_TOL).map_err(e)?;
        ensure(r.span_rank == 3, || {
            format!("example2 rank {}", r.span_rank)
        })?;
        let c = energy_check(&energy, &s2, p).map_err(e)?;
        res = res.max(c.max_residual());
        ensure(c.hessian_rank == 1, || {
            format!("Hessian rank {}", c.hessian_rank)
        })?;
    }
    ensure(res <= 1e-9, || format!("energy residual {res:e}"))?;
    Ok(format!(
        "example1: rank 4, Liouville in span at 20 samples; example2: rank 3, residual {res:.1e}, Hessian rank 1"
    ))
}

fn fd_agree(f: &dyn ScalarField, p: &TangentSample, max_degree: usize) -> Result<f64, String> {
    let m = 2 * p.dim();
    let jet = f.jet(p, max_degree).map_err(|e| e.to_string())?;
    let mut idx: Vec<Vec<usize>> = vec![vec![]];
    idx.extend((0..m).map(|a| vec![a]));
    if max_degree >= 2 {
        idx.extend((0..m).flat_map(|a| (a..m).map(move |b| vec![a, b])));
    }
    idx.iter().try_fold(0.0f64, |w, ix| {
        let exact = jet.derivative(ix);
        let fd = fd_oracle(f, p, ix).map_err(|e| e.to_string())?;
        Ok(w.max((exact - fd).abs() / exact.abs().max(1.0)))
    })
}

fn criterion_9() -> Outcome {
    let c = &coefficient_sets()[0];
    let lp = LambdaParams::new(1.0, vec![0.3, -0.2], 1.0).unwrap();
    let fam = family_metric(c);
    let funk = funk_metric(&lp).map_err(|e| e.to_string())?;
    let randers = randers_example(&lp);
    let beta = family_b(c).beta().clone();
    let fields: Vec<(&str, Field)> = vec![
        ("family F", fam.field().clone()),
        ("Klein", klein_metric(2, 1.0).field().clone()),
        ("Randers", randers.field().clone()),
        ("Funk", funk.field().clone()),
        ("β", beta.clone()),
        ("ρ", spraylab::metrizability::rho_of_p(&beta)),
        ("P of Funk", projective_factor_field(&funk)),
        ("G^1", deformation_spray(c).coefficient_field(0)),
        ("G^2", deformation_spray(c).coefficient_field(1)),
        ("example energy", samples::example2_energy()),
    ];
    let pts = [
        sample(&[0.1, -0.2], &[1.0, 0.3]),
        sample(&[-0.3, 0.25], &[-0.4, 0.9]),
    ];
    let mut fd = 0.0f64;
    for (name, f) in &fields {
        for p in &pts {
            let err = fd_agree(f, p, 2)?;
            ensure(err <= 1e-6, || format!("{name}: jet vs fd {err:e}"))?;
            fd = fd.max(err);
        }
    }
    let (mut jac, mut euler) = (0.0f64, 0.0f64);
    for (i, c) in coefficient_sets().iter().enumerate() {
        let s = deformation_spray(c);
        let m = family_metric(c);
        for p in family_samples(c, i as u64).iter().take(20) {
            let e = |e: spraylab::GeomError| e.to_string();
            let (a, b) = (jacobi(&s, p).map_err(e)?, jacobi_alt(&s, p).map_err(e)?);
            jac = jac.max((&a.r - &b.r).amax());
            euler = euler
                .max(homogeneity_defect(&s, p).map_err(e)?)
                .max(euler_defect(m.field(), p, 1.0).map_err(e)?.abs())
                .max(euler_defect(family_b(c).beta(), p, 1.0).map_err(e)?.abs());
        }
    }
    ensure(jac <= 1e-9, || format!("jacobi vs jacobi_alt {jac:e}"))?;
    ensure(euler <= 1e-10, || format!("Euler defect {euler:e}"))?;
    Ok(format!(
        "jet vs fd {fd:.1e}; jacobi routes {jac:.1e}; Euler {euler:.1e}"
    ))
}

fn criterion_10() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let names = [
        "klein_family.toml",
        "linear_family.toml",
        "example1_holonomy.toml",
        "example2_energy.toml",
        "funk.toml",
        "randers.toml",
        "planar_example.toml",
        "family_geodesics.toml",
    ];
    for name in names {
        let cfg = ScenarioConfig::load(&dir.join(name)).map_err(|e| e.to_string())?;
        let a = run(&cfg).map_err(|e| e.to_string())?;
        let b = run(&cfg).map_err(|e| e.to_string())?;
        ensure(a.ndjson == b.ndjson && a.csv == b.csv, || {
            format!("{name} differs between runs")
        })?;
    }
    Ok(format!(
        "{} scenarios byte-identical across two runs",
        names.len()
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("flag curvature of the family is 1", criterion_1),
        ("metrizability conditions hold for the family", criterion_2),
        ("negative cases fail the conditions", criterion_3),
        ("Ricci and trace identities", criterion_4),
        (
            "Hamel projective flatness and straight geodesics",
            criterion_5,
        ),
        ("Funk metric", criterion_6),
        ("Klein correspondence", criterion_7),
        ("non-metrizable examples", criterion_8),
        ("engine integrity", criterion_9),
        ("deterministic reports", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
