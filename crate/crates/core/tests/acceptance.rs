//! Acceptance criteria, one line per criterion.
//!
//! Run with `cargo test -p conerig --test acceptance -- --nocapture` to see
//! the table. A criterion may only fail if its deviation is the documented
//! one and that deviation is itself verified here.

use std::path::PathBuf;

use conerig::coning::{
    cone, cone_orbit, cone_orbit_matrix, cone_rigidity_matrix, estimate_cone_regular, signature_flip, verify_transfer,
    MetricTag, TransferOptions,
};
use conerig::document::FrameworkDocument;
use conerig::exact::{exact_rigidity_rank, is_rational_config};
use conerig::linalg::{cokernel, numeric_rank};
use conerig::orbit::{lift_motion, orbit_matrix, predict_finite_flex, symmetric_analysis, symmetric_motions, symmetric_stresses};
use conerig::rigidity::{estimate_regular, random_config, rigidity_matrix, trivial_motion_basis};
use conerig::symmetry::{symmetric_framework, PointGroup, SymFramework};
use conerig::tensegrity::{cone_tensegrity, invert_tensegrity, tensegrity_rigid, MemberKind, Tensegrity};
use conerig::{ConeKind, Configuration, Framework, Graph, NumericPolicy, Signature};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
    /// For a failing criterion: whether the documented explanation holds.
    deviation_verified: Option<bool>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            deviation_verified: None,
        }
    }
}

fn p() -> NumericPolicy {
    NumericPolicy::default()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> conerig::document::Loaded {
    FrameworkDocument::read(&fixture(name)).unwrap().load(&p()).unwrap()
}

fn rows_match_unordered(m: &DMatrix<f64>, expected: &[&[f64]], tol: f64) -> bool {
    if m.nrows() != expected.len() {
        return false;
    }
    let mut used = vec![false; expected.len()];
    (0..m.nrows()).all(|r| {
        let hit = expected.iter().enumerate().position(|(k, e)| {
            !used[k] && e.len() == m.ncols() && e.iter().enumerate().all(|(c, &x)| (m[(r, c)] - x).abs() <= tol)
        });
        hit.map(|k| used[k] = true).is_some()
    })
}

fn parallel(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
    let (na, nb) = (a.norm(), b.norm());
    na > 0.0 && nb > 0.0 && (1.0 - (a.dot(b) / (na * nb)).abs()) <= tol
}

fn random_graph<R: Rng>(n: usize, density: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn c1_k22_half_turn() -> Outcome {
    let loaded = load("ex21_k22_c2.json");
    let sf = &loaded.sf;
    let om = orbit_matrix(sf, &p()).unwrap();
    let matrix_ok = rows_match_unordered(&om.matrix, &[&[-1.0, 1.0, 1.0, -1.0], &[1.0, 3.0, 1.0, 3.0]], 1e-9);
    let rep = symmetric_analysis(sf, &om, false, &p()).unwrap();
    let dim_ok = rep.sym_flex_dim == 1;

    // the symmetric flex modulo trivial motions: lift ker O, strip the
    // trivial component
    let given = DVector::from_column_slice(&[-1.0, 0.0, -0.5, 0.5, 1.0, 0.0, 0.5, -0.5]);
    let trivial = trivial_motion_basis(sf.framework(), false, &p()).unwrap();
    let kernel = symmetric_motions(&om, &p()).unwrap();
    let flex = (0..kernel.dim())
        .map(|k| {
            let u = lift_motion(sf, &om, &kernel.vector(k)).unwrap();
            &u - trivial.project(&u)
        })
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let proportional = parallel(&flex, &given, 1e-9);
    let in_lifted_kernel = {
        let lifted: Vec<_> = (0..kernel.dim()).map(|k| lift_motion(sf, &om, &kernel.vector(k)).unwrap()).collect();
        let l = DMatrix::from_columns(&lifted);
        let coeffs = l.clone().svd(true, true).solve(&given, 1e-12).unwrap();
        (&l * coeffs - &given).norm() < 1e-9
    };
    let given_is_trivial = trivial.contains(&given, 1e-9);
    let mut o = Outcome::new(
        matrix_ok && dim_ok && proportional,
        format!(
            "orbit matrix {}, sym_flex_dim {} ; printed vector in lifted ker O: {in_lifted_kernel}, \
             trivial (rotation/2): {given_is_trivial}, proportional to the flex: {proportional}",
            if matrix_ok { "matches" } else { "differs" },
            rep.sym_flex_dim
        ),
    );
    if !o.pass {
        o.deviation_verified = Some(matrix_ok && dim_ok && in_lifted_kernel && given_is_trivial && !proportional);
    }
    o
}

fn c2_c3v_prism() -> Outcome {
    let loaded = load("ex22_c3v.json");
    let om = orbit_matrix(&loaded.sf, &p()).unwrap();
    let matrix_ok = rows_match_unordered(&om.matrix, &[&[1.0, -1.0], &[6.0, 0.0], &[0.0, 3.0]], 1e-9);
    let s = symmetric_stresses(&om, &p()).unwrap();
    let w = DVector::from_column_slice(&[1.0, -1.0 / 6.0, 1.0 / 3.0]);
    let spans = s.dim() == 1 && s.contains(&w, 1e-9);
    Outcome::new(
        matrix_ok && spans,
        format!("orbit matrix {}, stress space dim {} spanned by (1,-1/6,1/3): {spans}", if matrix_ok { "matches" } else { "differs" }, s.dim()),
    )
}

fn c3_modified_cone_orbit() -> Outcome {
    let loaded = load("ex22_c3v.json");
    let cf = cone(&loaded.sf, ConeKind::Euclidean).unwrap();
    let m = cone_orbit_matrix(&cf, true, &p()).unwrap();
    let w = DVector::from_column_slice(&[1.0, -1.0 / 6.0, 1.0 / 3.0, 5.0 / 6.0, 4.0 / 3.0]);
    let left = cokernel(&m, &p()).unwrap();
    let residual = (m.transpose() * &w).norm();
    let pass = left.contains(&w, 1e-9) && residual < 1e-9;
    Outcome::new(pass, format!("left kernel dim {}, residual of (1,-1/6,1/3,5/6,4/3): {residual:.1e}", left.dim()))
}

fn c4_rank_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut plain_ok = 0;
    for _ in 0..50 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(2..=8);
        let g = random_graph(n, 0.6, &mut rng);
        let fw = Framework::euclidean(g.clone(), random_config(n, d, &mut rng)).unwrap();
        let cf = cone(&SymFramework::trivial(fw.clone()), ConeKind::Euclidean).unwrap();
        let r = rigidity_matrix(&fw).rank(&p()).unwrap();
        let rs = cone_rigidity_matrix(&cf, false).unwrap().rank(&p()).unwrap();
        let stresses = (g.n_edges() - r, g.n_edges() + n - rs);
        if rs == r + n && stresses.0 == stresses.1 {
            plain_ok += 1;
        }
    }

    let groups = [
        ("C2", PointGroup::cyclic(2, 2).unwrap()),
        ("Cs", PointGroup::mirror(2).unwrap()),
        ("C3", PointGroup::cyclic(2, 3).unwrap()),
        ("C3/3d", PointGroup::cyclic(3, 3).unwrap()),
    ];
    let (mut sym_ok, mut sym_total) = (0, 0);
    for (_, group) in &groups {
        let mut built = 0;
        while built < 5 {
            let k = rng.random_range(1..=3);
            let reps: Vec<DVector<f64>> =
                (0..k).map(|_| DVector::from_fn(group.dim(), |_, _| rng.random_range(-1.0..1.0))).collect();
            let seeds: Vec<(usize, usize, usize)> = (0..rng.random_range(1..=4))
                .map(|_| (rng.random_range(0..k), rng.random_range(0..group.order()), rng.random_range(0..k)))
                .collect();
            let Ok(sf) = symmetric_framework(group.clone(), &reps, &seeds, &p()) else {
                continue;
            };
            built += 1;
            sym_total += 1;
            let cf = cone(&sf, ConeKind::Euclidean).unwrap();
            let r = orbit_matrix(&sf, &p()).unwrap().rank(&p()).unwrap();
            let rs = numeric_rank(&cone_orbit(&cf, &p()).unwrap().matrix.matrix, &p()).unwrap();
            if rs == r + k {
                sym_ok += 1;
            }
        }
    }
    Outcome::new(
        plain_ok == 50 && sym_ok == sym_total,
        format!("rank(R*) = rank(R) + n on {plain_ok}/50; rank(O*) = rank(O) + k on {sym_ok}/{sym_total} (C2, Cs, C3 planar and spatial)"),
    )
}

fn scaled(fw: &Framework, f: impl Fn(&DVector<f64>) -> DVector<f64>) -> Framework {
    let pts = fw.config().points().iter().map(f).collect();
    fw.with_config(Configuration::new(fw.dim(), pts).unwrap()).unwrap()
}

fn c5_pull_push() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ok, mut total, mut failures) = (0, 0, Vec::new());
    for t in 0..20 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(3..=7);
        let g = random_graph(n, 0.7, &mut rng);
        let fw = Framework::euclidean(g, random_config(n, d, &mut rng)).unwrap();
        let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
        let max = fw.config().points().iter().map(|p| p.norm()).fold(0.0, f64::max);
        let inside = scaled(&fw, |p| p * (0.8 / max));
        // move every joint outside the unit disc along its own ray
        let outside = scaled(&fw, |p| {
            let r = p.norm().max(1e-3);
            p * ((1.5 + r) / r)
        });
        let cases = [
            (&fw, MetricTag::EuclideanCone, Some(alphas.clone())),
            (&fw, MetricTag::MinkowskiCone, Some(alphas.clone())),
            (&fw, MetricTag::Hemisphere, Some(alphas.clone())),
            (&inside, MetricTag::Hyperbolic, Some(alphas.clone())),
            (&outside, MetricTag::DeSitter, None),
        ];
        for (base, target, a) in cases {
            total += 1;
            let opts = TransferOptions {
                alphas: a,
                ..Default::default()
            };
            match verify_transfer(&SymFramework::trivial(base.clone()), target, &opts, &p()) {
                Ok(r) if r.all_pass => ok += 1,
                Ok(r) => failures.push(format!(
                    "#{t} {target}: {:?}",
                    r.clauses.iter().filter(|c| !c.pass).map(|c| &c.clause).collect::<Vec<_>>()
                )),
                Err(e) => failures.push(format!("#{t} {target}: {e}")),
            }
        }
    }
    Outcome::new(
        ok == total,
        format!("{ok}/{total} transfers pass every clause (ranks, dims, residuals <= 1e-8){}", if failures.is_empty() { String::new() } else { format!("; {failures:?}") }),
    )
}

fn c6_regular_points() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut agree, mut regular, mut singular) = (0, 0, 0);
    for t in 0..20 {
        let n = rng.random_range(4..=7);
        let g = random_graph(n, 0.8, &mut rng);
        let config = if t % 2 == 0 {
            random_config(n, 2, &mut rng)
        } else {
            // collinear joints: a special position for any graph with a cycle
            let pts = (0..n)
                .map(|_| {
                    let s: f64 = rng.random_range(-1.0..1.0);
                    DVector::from_column_slice(&[s, 0.3 * s + 0.1])
                })
                .collect();
            Configuration::new(2, pts).unwrap()
        };
        let fw = Framework::euclidean(g.clone(), config).unwrap();
        let cf = cone(&SymFramework::trivial(fw.clone()), ConeKind::Euclidean).unwrap();
        let seed = 600 + t as u64;
        let base_max = estimate_regular(&g, fw.signature(), &p(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().max_rank;
        let cone_max = estimate_cone_regular(&g, cf.signature(), &p(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let base_reg = rigidity_matrix(&fw).rank(&p()).unwrap() == base_max;
        let cone_reg = cone_rigidity_matrix(&cf, false).unwrap().rank(&p()).unwrap() == cone_max;
        if base_reg == cone_reg {
            agree += 1;
        }
        if base_reg {
            regular += 1;
        } else {
            singular += 1;
        }
    }
    Outcome::new(
        agree == 20 && regular > 0 && singular > 0,
        format!("regularity agrees on {agree}/20 pairs ({regular} regular, {singular} special bases)"),
    )
}

fn c7_k44() -> Outcome {
    let perp = load("k44_perpendicular.json");
    let oblique = load("k44_oblique.json");
    let a = predict_finite_flex(&perp.sf, &p(), &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    let b = predict_finite_flex(&oblique.sf, &p(), &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    Outcome::new(
        a.sym_flex_dim >= 1 && a.predicted && !b.predicted,
        format!(
            "perpendicular C2v: sym_flex_dim {} predicted {}; oblique C2: predicted {} (S-regular {})",
            a.sym_flex_dim, a.predicted, b.predicted, b.s_regular
        ),
    )
}

fn c8_signature_flip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = 0;
    for _ in 0..20 {
        let sig = Signature::new(rng.random_range(1..=3), rng.random_range(1..=2)).unwrap();
        let n = rng.random_range(3..=7);
        let fw = Framework::new(random_graph(n, 0.7, &mut rng), random_config(n, sig.dim(), &mut rng), sig).unwrap();
        let k = rng.random_range(1..=sig.neg) as i32;
        let flipped = signature_flip(&fw, k).unwrap();
        let same = flipped.signature().neg + k as usize == sig.neg
            && rigidity_matrix(&flipped).rank(&p()).unwrap() == rigidity_matrix(&fw).rank(&p()).unwrap();
        if same {
            ok += 1;
        }
    }
    Outcome::new(ok == 20, format!("rank unchanged on {ok}/20 Minkowskian frameworks"))
}

fn c9_tensegrity() -> Outcome {
    let loaded = load("k4_tensegrity.json");
    let tf = Tensegrity::new(loaded.framework().clone(), loaded.kinds.clone().unwrap()).unwrap();
    let plane = tensegrity_rigid(&tf, &p()).unwrap().rigid;
    let hemi = cone_tensegrity(&tf, MetricTag::Hemisphere, None, &p()).unwrap();
    let hyper = cone_tensegrity(&tf, MetricTag::Hyperbolic, None, &p()).unwrap();
    let on_hemi = tensegrity_rigid(&hemi.tensegrity, &p()).unwrap().rigid;
    let on_h2 = tensegrity_rigid(&hyper.tensegrity, &p()).unwrap().rigid;

    let sphere = cone_tensegrity(&tf, MetricTag::WholeSphere, None, &p()).unwrap();
    let mut inverted_ok = 0;
    for mask in 0..16usize {
        let sel: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let inv = invert_tensegrity(&sphere, &sel, &p()).unwrap();
        if tensegrity_rigid(&inv.tensegrity, &p()).unwrap().rigid {
            inverted_ok += 1;
        }
    }
    let bad = Tensegrity::new(loaded.framework().clone(), vec![MemberKind::Cable; 6]).unwrap();
    let control = !tensegrity_rigid(&bad, &p()).unwrap().rigid;
    Outcome::new(
        plane && on_hemi && on_h2 && inverted_ok == 16 && control,
        format!("E2 {plane}, hemisphere {on_hemi}, H2 {on_h2}; rigid after {inverted_ok}/16 relabeled inversions; all-cable control rejected: {control}"),
    )
}

fn c10_exact_oracle() -> Outcome {
    let (mut checked, mut agree, mut skipped) = (0, 0, Vec::new());
    let mut names: Vec<_> = std::fs::read_dir(fixture(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    names.sort();
    for path in names {
        let loaded = FrameworkDocument::read(&path).unwrap().load(&p()).unwrap();
        let fw = loaded.framework();
        if !is_rational_config(fw) {
            skipped.push(path.file_stem().unwrap().to_string_lossy().into_owned());
            continue;
        }
        checked += 1;
        if exact_rigidity_rank(fw) == Some(rigidity_matrix(fw).rank(&p()).unwrap()) {
            agree += 1;
        }
    }
    Outcome::new(
        checked > 0 && agree == checked,
        format!("exact rank = numeric rank on {agree}/{checked} rational fixtures (irrational, skipped: {skipped:?})"),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("golden K22 half-turn", c1_k22_half_turn),
        ("golden C3v prism", c2_c3v_prism),
        ("golden modified cone orbit matrix", c3_modified_cone_orbit),
        ("coning rank law", c4_rank_law),
        ("pull/push invariance", c5_pull_push),
        ("regular-point transfer", c6_regular_points),
        ("K44 perpendicular vs oblique", c7_k44),
        ("signature flip", c8_signature_flip),
        ("tensegrity transfer", c9_tensegrity),
        ("exact-rational oracle", c10_exact_oracle),
    ];
    let mut unexplained = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", k + 1, o.detail);
        if !o.pass && o.deviation_verified != Some(true) {
            unexplained.push(k + 1);
        }
    }
    assert!(unexplained.is_empty(), "criteria failing without a verified explanation: {unexplained:?}");
}
