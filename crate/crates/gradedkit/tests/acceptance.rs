//! Acceptance suite: one test per criterion, each printing a pass line
//! and holding its stated time budget. Every comparison is exact
//! (tolerance-zero) symbolic equality.

use gradedkit::algebroids::{
    bi_algebroid_from_algebroid, courant_from_bi_algebroid, structure_from_q, AlgebroidData,
    Section,
};
use gradedkit::dsl::{self, Command, Output};
use gradedkit::grading::{Chart, Coordinate, Parity, Weight};
use gradedkit::groupoids::{
    self, lie_functor, lie_functor_action, pair_groupoid, tangent_lift_groupoid,
    truncate_groupoid, GroupoidSpec,
};
use gradedkit::lifts::{self, HomAction};
use gradedkit::symalg::{int, rat, Coeff, Expr, Substitution};
use gradedkit::{Ham, VecField};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::time::Instant;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"))
}

/// Deterministic xorshift64* generator; no external entropy.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn budget(name: &str, started: Instant, seconds: u64) {
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < seconds,
        "{name} exceeded {seconds}s: {elapsed:?}"
    );
}

#[test]
fn criterion_01_homogeneity_law() {
    let started = Instant::now();
    let chart = Chart::new(
        1,
        vec![
            Coordinate::new("x", Weight(vec![0]), Parity::Even),
            Coordinate::new("xd", Weight(vec![1]), Parity::Even),
            Coordinate::new("xdd", Weight(vec![2]), Parity::Even),
        ],
    )
    .unwrap();
    let action = HomAction::canonical(&chart, "t");
    assert!(action.verify().unwrap().passed());
    let pullback = action.pullback();
    let ext = action.extended_chart().clone();
    let t = Expr::var(&ext, "t").unwrap();
    let embed = Substitution::new(&chart, &ext, &BTreeMap::new()).unwrap();

    let x = Expr::var(&chart, "x").unwrap();
    let xd = Expr::var(&chart, "xd").unwrap();
    let xdd = Expr::var(&chart, "xdd").unwrap();

    let mut rng = Rng(0x5EED_0001);
    for trial in 0..50 {
        // random homogeneous polynomial of total weight w in 1..=6
        let w = 1 + rng.below(6) as u32;
        let mut f = Expr::zero(&chart);
        let monomials = rng.below(3) + 1;
        for _ in 0..=monomials {
            let b = rng.below((w / 2 + 1) as u64) as u32; // xdd power
            let a = w - 2 * b; // xd power
            let e = rng.below(3) as u32; // x power
            let mut k = rng.below(9) as i64 - 4;
            if k == 0 {
                k = 1;
            }
            let mono = x.pow(e).mul(&xd.pow(a)).mul(&xdd.pow(b)).scale(&int(k));
            f = f.add(&mono);
        }
        if f.is_zero() {
            continue;
        }
        assert_eq!(
            f.homogeneous_weight().map(|w| w.total()),
            Some(w),
            "trial {trial} not homogeneous"
        );
        let lhs = pullback.apply(&f).unwrap();
        let rhs = t.pow(w).mul(&embed.apply(&f).unwrap());
        assert_eq!(lhs, rhs, "trial {trial}: pullback != t^{w} * f");
    }
    budget("criterion 1", started, 1);
    println!("[pass] criterion 1: homogeneity law on 50 random polynomials");
}

#[test]
fn criterion_02_homogenization() {
    let started = Instant::now();
    let doc = dsl::parse(&fixture("homogeneity.gk")).unwrap();
    let action = &doc.env.actions["skew"];
    assert!(action.verify().unwrap().passed());
    assert_eq!(action.degree().unwrap(), 2);
    let change = action.homogenize().unwrap();
    let chart = action.chart().clone();
    let x = Expr::var(&chart, "x").unwrap();
    let y = Expr::var(&chart, "y").unwrap();
    let w = Expr::var(&chart, "w").unwrap();
    assert_eq!(change.image(chart.id_of("w").unwrap()), &w.sub(&x.mul(&y)));
    assert_eq!(change.image(chart.id_of("x").unwrap()), &x);
    assert_eq!(change.image(chart.id_of("y").unwrap()), &y);
    // re-run verification against the canonical diagonal action
    let residuals = action.verify_change(&change).unwrap();
    assert!(residuals.iter().all(|(_, e)| e.is_zero()));
    budget("criterion 2", started, 1);
    println!("[pass] criterion 2: homogenization of the (x, y, w = z + x*y) action");
}

#[test]
fn criterion_03_q_manifold_suite() {
    let started = Instant::now();
    let doc = dsl::parse(&fixture("qmanifolds.gk")).unwrap();
    for name in ["deRham", "so3Q"] {
        let rep = doc.env.fields[name].is_homological().unwrap();
        assert!(rep.residual.is_zero(), "{name}: residual literally zero");
    }
    let bad = dsl::parse(&fixture("neg_perturbed_so3.gk")).unwrap();
    let rep = bad.env.fields["so3bad"].is_homological().unwrap();
    assert!(!rep.passed());
    let printed = rep.residual.to_string();
    assert!(printed != "0" && !printed.is_empty(), "printed: {printed}");
    budget("criterion 3", started, 1);
    println!("[pass] criterion 3: de Rham and so(3) homological, perturbation fails with residual {printed}");
}

/// T(ΠTM) over R^n with the tangent-lifted de Rham field: the degree-2
/// weighted algebroid fixture.
fn t_pi_tm(n: usize) -> AlgebroidData {
    let mut coords = Vec::new();
    for a in 1..=n {
        coords.push(Coordinate::new(format!("x{a}"), Weight(vec![0, 0]), Parity::Even));
    }
    for a in 1..=n {
        coords.push(Coordinate::new(format!("xi{a}"), Weight(vec![0, 1]), Parity::Odd));
    }
    let pitm = Chart::new(2, coords).unwrap();
    let mut q = VecField::zero(&pitm);
    for a in 1..=n {
        q.set_component(
            pitm.id_of(&format!("x{a}")).unwrap(),
            Expr::var(&pitm, &format!("xi{a}")).unwrap(),
        );
    }
    let t = lifts::tangent_chart(&pitm);
    let q_t = lifts::tangent_lift_field(&q, &t).unwrap();
    AlgebroidData::new(&t, q_t, 2, 1).unwrap()
}

#[test]
fn criterion_04_weighted_bracket_weight() {
    let started = Instant::now();
    let a = t_pi_tm(2);
    let chart = a.chart().clone();
    let chart_f = chart.with_func("f", &["x1", "x2"]).unwrap();
    // rebuild the algebroid on the chart carrying the opaque symbol
    let move_to = Substitution::new(&chart, &chart_f, &BTreeMap::new()).unwrap();
    let mut q = VecField::zero(&chart_f);
    for (c, comp) in a.q().components() {
        let id = chart_f.id_of(&chart.coord(c).name).unwrap();
        q.set_component(id, move_to.apply(comp).unwrap());
    }
    let a = AlgebroidData::new(&chart_f, q, 2, 1).unwrap();
    let chart = chart_f;
    assert!(a.verify_weighted().unwrap().passed());

    let one = Expr::one(&chart);
    let f = Expr::func(&chart, "f").unwrap();
    // basis of weight-1 sections: coefficients on the top fibres
    let weight1: Vec<Section> = vec![
        Section::new(&a, 1, &[("dxi1", one.clone())]).unwrap(),
        Section::new(&a, 1, &[("dxi2", one.clone())]).unwrap(),
        Section::new(&a, 1, &[("dxi1", f.clone())]).unwrap(),
    ];
    // basis of weight-2 sections: lower fibres plus velocity-linear tops
    let dx1 = Expr::var(&chart, "dx1").unwrap();
    let dx2 = Expr::var(&chart, "dx2").unwrap();
    let weight2: Vec<Section> = vec![
        Section::new(&a, 2, &[("xi1", one.clone())]).unwrap(),
        Section::new(&a, 2, &[("xi2", f.clone())]).unwrap(),
        Section::new(&a, 2, &[("dxi1", dx1.clone())]).unwrap(),
        Section::new(&a, 2, &[("dxi2", dx2.mul(&f))]).unwrap(),
    ];
    let pool = |r: u32| -> &Vec<Section> {
        if r == 1 {
            &weight1
        } else {
            &weight2
        }
    };
    for r1 in [1u32, 2] {
        for r2 in [1u32, 2] {
            for s1 in pool(r1) {
                for s2 in pool(r2) {
                    let br = gradedkit::algebroids::section_bracket(&a, s1, s2).unwrap();
                    let expect = (r1 + r2) as i64 - 2;
                    assert_eq!(br.weight as i64, expect.max(0));
                    // exact homogeneity of every nonzero coefficient
                    for (_, comp) in br.field.components() {
                        assert!(comp.homogeneous_weight().is_some() || comp.is_zero());
                    }
                }
            }
        }
    }
    budget("criterion 4", started, 5);
    println!("[pass] criterion 4: section brackets carry weight r1 + r2 - 2 on T(ΠTM)");
}

/// Second-order Taylor commutator oracle: for a group in source-adapted
/// coordinates (unit at the origin), the multiplication expands as
/// m(u, v) = u + v + B(u, v) + O(3) and the bracket of the Lie algebra is
/// the antisymmetrised bilinear part. Implemented directly on the
/// multiplication images, independently of the Lie-functor machinery.
fn taylor_commutator_oracle(
    spec: &GroupoidSpec,
    fibers: &[&str],
) -> BTreeMap<(String, String, String), Coeff> {
    let comp = spec.composable().chart.clone();
    let mut zero_map = BTreeMap::new();
    for c in comp.coords() {
        let is_left = c.name.ends_with("_l");
        let is_right_fiber = fibers.iter().any(|f| c.name == format!("{f}_r"));
        if is_left || is_right_fiber {
            zero_map.insert(c.name.clone(), Expr::zero(&comp));
        }
    }
    let at_units = Substitution::new(&comp, &comp, &zero_map).unwrap();
    let mut bilinear = BTreeMap::new();
    for k in fibers {
        let img = spec
            .composable()
            .mult
            .image(spec.gamma().id_of(k).unwrap())
            .clone();
        for i in fibers {
            for j in fibers {
                let li = comp.id_of(&format!("{i}_l")).unwrap();
                let rj = comp.id_of(&format!("{j}_r")).unwrap();
                let c = img.derivative(li).derivative(rj);
                let v = at_units.apply(&c).unwrap().as_constant().unwrap();
                if !v.is_zero() {
                    bilinear.insert((i.to_string(), j.to_string(), k.to_string()), v);
                }
            }
        }
    }
    let get = |m: &BTreeMap<(String, String, String), Coeff>, i: &str, j: &str, k: &str| {
        m.get(&(i.to_string(), j.to_string(), k.to_string()))
            .cloned()
            .unwrap_or_else(Coeff::zero)
    };
    let mut out = BTreeMap::new();
    for i in fibers {
        for j in fibers {
            for k in fibers {
                let c = get(&bilinear, i, j, k) - get(&bilinear, j, i, k);
                if !c.is_zero() {
                    out.insert((i.to_string(), j.to_string(), k.to_string()), c);
                }
            }
        }
    }
    out
}

#[test]
fn criterion_05_lie_functor_oracle() {
    let started = Instant::now();

    // pair groupoid over R^2 through the CLI-level `derive` path
    let doc = dsl::parse(&fixture("derive_pair_r2.gk")).unwrap();
    let out = dsl::run(
        &doc,
        &Command::Derive {
            name: "pair2".into(),
        },
    )
    .unwrap();
    let Output::Text(text) = out else {
        panic!("derive returns text")
    };
    assert_eq!(text, fixture("tm_algebroid_handwritten.gk"));

    // and at the library level: identity anchor, zero structure functions
    let spec = &doc.env.groupoids["pair2"];
    let a = lie_functor(spec).unwrap();
    let (anchor, structure) = structure_from_q(&a).unwrap();
    assert!(structure.is_empty());
    for ((th, x), rho) in &anchor {
        assert_eq!(th, &format!("th_Y_{x}"));
        assert_eq!(rho, &Expr::one(a.chart()));
    }

    // ax+b: anchor zero, [e_A, e_b] = ±e_b, against the Taylor oracle
    let doc = dsl::parse(&fixture("derive_axb.gk")).unwrap();
    let spec = &doc.env.groupoids["axb"];
    assert!(spec.verify().unwrap().passed());
    let a = lie_functor(spec).unwrap();
    let (anchor, structure) = structure_from_q(&a).unwrap();
    assert!(anchor.is_empty(), "anchor over a point is zero");
    let got = structure
        .get(&("th_A".into(), "th_b".into(), "th_b".into()))
        .expect("[e_A, e_b] along e_b")
        .as_constant()
        .unwrap();
    assert!(got.clone() == Coeff::one() || got.clone() == -Coeff::one());

    let oracle = taylor_commutator_oracle(spec, &["A", "b"]);
    let oracle_c = oracle
        .get(&("A".into(), "b".into(), "b".into()))
        .cloned()
        .unwrap();
    assert_eq!(oracle_c, rat(1, 1));
    assert!(got.clone() == oracle_c || got == -oracle_c);
    // no other independent bracket entries
    assert!(oracle
        .keys()
        .all(|(i, j, k)| (i == "A" && j == "b" || i == "b" && j == "A") && k == "b"));

    budget("criterion 5", started, 5);
    println!("[pass] criterion 5: Lie functor matches the handwritten TM fixture and the Taylor commutator oracle");
}

#[test]
fn criterion_06_weighted_lie_functor() {
    let started = Instant::now();
    let doc = dsl::parse(&fixture("ex03_weighted_pair.gk")).unwrap();
    let w = &doc.env.weighted["wPairF1"];
    assert!(w.verify().unwrap().passed());
    let a = lie_functor(&w.spec).unwrap();
    assert_eq!(a.degree(), 2);
    let action = lie_functor_action(w).unwrap();
    assert!(action.verify().unwrap().passed());
    let rep = a.verify_weighted_with(Some(&action)).unwrap();
    assert!(rep.passed());

    // fibre weight table equals the tangent lift of F1
    let f1 = doc.env.charts["F1"].clone();
    let tf1 = lifts::tangent_chart(&f1);
    let a_chart = a.chart();
    for c in f1.coords() {
        let base = a_chart.coord(a_chart.id_of(&c.name).unwrap());
        assert_eq!(base.weight, tf1.coord(tf1.id_of(&c.name).unwrap()).weight);
        let theta = a_chart.coord(a_chart.id_of(&format!("th_Y_{}", c.name)).unwrap());
        let velocity = tf1.coord(tf1.id_of(&format!("d{}", c.name)).unwrap());
        assert_eq!(theta.weight, velocity.weight);
    }
    budget("criterion 6", started, 5);
    println!("[pass] criterion 6: weighted pair groupoid differentiates to a degree-2 weighted algebroid with the tangent-lift weight table");
}

#[test]
fn criterion_07_tower_coherence() {
    let started = Instant::now();
    let doc = dsl::parse(&fixture("ex03_weighted_pair.gk")).unwrap();
    let spec = &doc.env.groupoids["pairF1"];

    // route 1: truncate the groupoid at level 0, then differentiate
    let g0 = truncate_groupoid(spec, 0).unwrap();
    assert!(g0.verify().unwrap().passed());
    let a1 = lie_functor(&g0).unwrap();

    // route 2: differentiate, then project the algebroid tower to level 1
    let a = lie_functor(spec).unwrap();
    let a2 = a.tower_project(1).unwrap();

    let text1 = dsl::render_algebroid("level", &a1);
    let text2 = dsl::render_algebroid("level", &a2);
    assert_eq!(text1, text2, "canonical declarations differ");
    budget("criterion 7", started, 5);
    println!("[pass] criterion 7: lieFunctor ∘ truncate = towerProject ∘ lieFunctor on the weighted pair groupoid");
}

#[test]
fn criterion_08_bialgebroid_and_courant_suite() {
    let started = Instant::now();

    // triangular fixture: linear Poisson on the plane
    let doc = dsl::parse(&fixture("bialgebroid_linear_poisson.gk")).unwrap();
    let b = &doc.env.bialgebroids["btri"];
    assert!(b.verify().unwrap().passed());
    assert!(b.sharp_map().unwrap().passed());

    // T(TM) over the line: Θ_1 reproduces the displayed generator
    let a = t_pi_tm(1);
    let b = bi_algebroid_from_algebroid(&a).unwrap();
    let c = courant_from_bi_algebroid(&b, Coeff::one()).unwrap();
    assert!(c.verify().unwrap().passed());
    let ch = c.chart().clone();
    let var = |n: &str| Expr::var(&ch, n).unwrap();
    let displayed = var("xi1")
        .mul(&var("p_x1"))
        .add(&var("dxi1").mul(&var("p_dx1")));
    assert_eq!(c.theta.expr(), &displayed);

    // degree-2 sections: basis of bi-weight (1,1) functions
    let basis = vec![
        var("dxi1"),
        var("p_xi1"),
        var("dx1").mul(&var("xi1")),
        var("dx1").mul(&var("p_dxi1")),
    ];

    // pairing bi-weight (-1, -2) audit
    for s1 in &basis {
        for s2 in &basis {
            let p = c.pairing(s1, s2).unwrap();
            if p.is_zero() {
                continue;
            }
            let w1 = s1.homogeneous_weight().unwrap().shift();
            let w2 = s2.homogeneous_weight().unwrap().shift();
            let got = p.homogeneous_weight().unwrap().shift();
            let expect = w1.add(&w2).add(&gradedkit::grading::Shift(vec![-1, -2]));
            assert_eq!(got, expect, "pairing drop");
        }
    }

    // Dorfman bi-weight (-1, -1) audit and closure
    for s1 in &basis {
        for s2 in &basis {
            let d = c.dorfman(s1, s2).unwrap();
            if d.is_zero() {
                continue;
            }
            let w1 = s1.homogeneous_weight().unwrap().shift();
            let w2 = s2.homogeneous_weight().unwrap().shift();
            let got = d.homogeneous_weight().unwrap().shift();
            let expect = w1.add(&w2).add(&gradedkit::grading::Shift(vec![-1, -1]));
            assert_eq!(got, expect, "Dorfman drop");
        }
    }

    // Loday identity on all basis triples: for odd sections,
    // [a,[b,c]] = [[a,b],c] + [b,[a,c]]
    for s1 in &basis {
        for s2 in &basis {
            for s3 in &basis {
                let lhs = c.dorfman(s1, &c.dorfman(s2, s3).unwrap()).unwrap();
                let t1 = c.dorfman(&c.dorfman(s1, s2).unwrap(), s3).unwrap();
                let t2 = c.dorfman(s2, &c.dorfman(s1, s3).unwrap()).unwrap();
                assert_eq!(lhs, t1.add(&t2), "Loday identity");
            }
        }
    }

    // anchor behaviour, read off the displayed generator Θ = θ^α p_α: the
    // χ-half carries the anchor (χ pairs with θ inside Θ and produces the
    // momentum that differentiates), the θ-half is annihilated when the
    // dual structure vanishes, and constants map to zero either way
    let f = var("x1").pow(2);
    let df = var("x1").scale(&rat(2, 1));
    let rho_chi = c.anchor(&var("p_xi1"), &f).unwrap();
    assert!(rho_chi == df || rho_chi == df.neg(), "got {rho_chi}");
    let rho_theta = c.anchor(&var("xi1"), &f).unwrap();
    assert!(rho_theta.is_zero());
    assert!(c.anchor(&var("p_xi1"), &Expr::one(&ch)).unwrap().is_zero());

    budget("criterion 8", started, 30);
    println!("[pass] criterion 8: bi-algebroid, sharp map, Courant generator, pairing/Dorfman weights and Loday identity");
}

#[test]
fn criterion_09_higher_tangent_functor_compatibility() {
    let started = Instant::now();
    let line = Chart::new(1, vec![Coordinate::new("x", Weight(vec![0]), Parity::Even)]).unwrap();
    let g = pair_groupoid(&line).unwrap();

    // route A: differentiate the tangent-lifted groupoid
    let tg = tangent_lift_groupoid(&g).unwrap();
    assert!(tg.verify().unwrap().passed());
    let a_route = lie_functor(&tg).unwrap();

    // route B: tangent-lift the algebroid of the groupoid
    let a0 = lie_functor(&g).unwrap();
    let ta0_chart = lifts::tangent_chart(a0.chart());
    let q_lift = lifts::tangent_lift_field(a0.q(), &ta0_chart).unwrap();

    // canonical identification: swap the (linear, tangent) weight slots of
    // route B and rename d(th_Y_x) to th_(dY_x)
    let swapped = lifts::swap_weight_components(&ta0_chart, 1, 2);
    let mut names = BTreeMap::new();
    names.insert("dth_Y_x".to_string(), "th_dY_x".to_string());
    let ident = lifts::rename_substitution(&swapped, a_route.chart(), &names).unwrap();

    // charts agree under the identification
    for c in swapped.coords() {
        let target_name = names.get(&c.name).unwrap_or(&c.name);
        let tc = a_route
            .chart()
            .coord(a_route.chart().id_of(target_name).unwrap());
        assert_eq!(c.weight, tc.weight, "weight of {}", c.name);
        assert_eq!(c.parity, tc.parity);
    }

    // fields agree: transport route-B's lifted Q along the identification
    let move_q = Substitution::new(&ta0_chart, &swapped, &BTreeMap::new()).unwrap();
    for (c, comp) in q_lift.components() {
        let name = &ta0_chart.coord(c).name;
        let target_name = names.get(name).unwrap_or(name);
        let tid = a_route.chart().id_of(target_name).unwrap();
        let transported = ident.apply(&move_q.apply(comp).unwrap()).unwrap();
        assert_eq!(
            transported,
            a_route.q().component(tid),
            "component of {target_name}"
        );
    }
    // and nothing extra on route A
    for (c, comp) in a_route.q().components() {
        if !comp.is_zero() {
            let name = &a_route.chart().coord(c).name;
            let back = names
                .iter()
                .find(|(_, v)| *v == name)
                .map(|(k, _)| k.clone())
                .unwrap_or_else(|| name.clone());
            assert!(ta0_chart.id_of(&back).is_some());
        }
    }
    budget("criterion 9", started, 10);
    println!("[pass] criterion 9: A(T pair) = T A(pair) under the canonical identification");
}

#[test]
fn criterion_10_determinism_and_corpus_runtime() {
    let started = Instant::now();
    let dir = format!("{}/fixtures", env!("CARGO_MANIFEST_DIR"));
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".gk"))
        .collect();
    names.sort();
    assert!(names.len() >= 20, "corpus holds the example families");

    let run_all = || -> String {
        let mut out = String::new();
        for name in &names {
            let text = std::fs::read_to_string(format!("{dir}/{name}")).unwrap();
            let doc = dsl::parse(&text).unwrap();
            match dsl::run(&doc, &Command::Check).unwrap() {
                Output::Report(r) => {
                    let expect_fail = name.starts_with("neg_");
                    assert_eq!(
                        r.exit_code(),
                        if expect_fail { 1 } else { 0 },
                        "{name} verdict"
                    );
                    if expect_fail {
                        assert!(
                            r.checks.iter().any(|c| !c.residuals.is_empty()
                                || !c.weight_audits.is_empty()),
                            "{name} prints residuals"
                        );
                    }
                    out.push_str(&format!("== {name}\n"));
                    out.push_str(&r.to_json());
                    out.push('\n');
                }
                Output::Text(_) => unreachable!(),
            }
        }
        out
    };
    let first = run_all();
    let second = run_all();
    assert_eq!(first, second, "reports byte-identical across runs");
    budget("criterion 10", started, 120);
    println!(
        "[pass] criterion 10: {} fixtures deterministic in {:?}",
        names.len(),
        started.elapsed()
    );
}

#[test]
fn weighted_groupoid_audit_for_lifted_poisson() {
    // supporting check for the poisson_lift fixture: the hand-written
    // lifted bivector equals the complete lift computed by the library
    // (dual-route comparison), and the audit passes at weight -1.
    let doc = dsl::parse(&fixture("poisson_lift.gk")).unwrap();
    let declared = &doc.env.hams["Lambda0T"];

    let gamma0 = doc.env.charts["Gamma2"].clone();
    let mv0 = lifts::multivector_chart(&gamma0);
    let var = |n: &str| Expr::var(&mv0, n).unwrap();
    // difference bivector of p = d/dx1 ^ d/dx2 in adapted coordinates
    let pi = Ham::new(
        var("p_b1")
            .mul(&var("p_b2"))
            .neg()
            .add(&var("p_b1").mul(&var("p_Y2")))
            .add(&var("p_Y1").mul(&var("p_b2"))),
    )
    .unwrap();
    assert!(pi.poisson(&pi).unwrap().is_zero());
    let lifted = lifts::tangent_lift_poisson(&pi, 1).unwrap();
    let move_to = Substitution::new(lifted.chart(), declared.chart(), &BTreeMap::new()).unwrap();
    assert_eq!(&move_to.apply(lifted.expr()).unwrap(), declared.expr());

    let w = &doc.env.weighted["wTpair2"];
    let rep = groupoids::poisson_weight_audit(w, declared, 1).unwrap();
    assert!(rep.passed());
    println!("[pass] supplement: tangent-lifted multiplicative Poisson structure audits at weight -1");
}
