//! End-to-end acceptance checks. Each test prints one PASS/FAIL line with its
//! wall-clock time and fails if either the check or the time budget fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use matfactor::oracle::{self, Codec, Theorem, VerifyConfig, DEFAULT_CEILING};
use matfactor::subspace::{commutator_span, product_span_two};
use matfactor::{
    degenerate_pair_witness, hyperplane_pair_factor, inverse_pair, sum_of_products_decompose, AffineSubspace,
    Degeneracy, Error, FieldSpec, Hyperplane, LinearSubspace, Matrix, Scalar, SearchBudget, SemigroupFactorizer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gf(p: u64) -> FieldSpec {
    FieldSpec::prime(p).unwrap()
}

fn finish(label: &str, failures: &[String], started: Instant, limit_secs: u64) {
    let elapsed = started.elapsed();
    let within = elapsed < Duration::from_secs(limit_secs);
    let ok = failures.is_empty() && within;
    println!(
        "{} {label} ({:.2}s, limit {limit_secs}s){}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        failures.first().map(|f| format!(": {f}")).unwrap_or_default()
    );
    assert!(
        failures.is_empty(),
        "{label}: {} failures, first: {}",
        failures.len(),
        failures[0]
    );
    assert!(within, "{label}: took {elapsed:?}");
}

fn random_matrix(field: FieldSpec, n: usize, rng: &mut ChaCha8Rng, spread: i64) -> Matrix {
    Matrix::from_vec(field, n, n, (0..n * n).map(|_| field.random(rng, spread)).collect()).unwrap()
}

fn random_hyperplane(field: FieldSpec, n: usize, rng: &mut ChaCha8Rng, spread: i64) -> Hyperplane {
    loop {
        if let Ok(h) = Hyperplane::new(random_matrix(field, n, rng, spread)) {
            return h;
        }
    }
}

fn random_invertible(field: FieldSpec, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = random_matrix(field, n, rng, 3);
        if m.is_invertible() {
            return m;
        }
    }
}

/// `tr(A M)` computed entrywise.
fn pairing(a: &Matrix, m: &Matrix) -> Scalar {
    let n = a.shape().0;
    let mut acc = a.field().zero();
    for i in 0..n {
        for j in 0..n {
            acc = &acc + &(a.get(i, j) * m.get(j, i));
        }
    }
    acc
}

fn all_matrices(field: FieldSpec, n: usize) -> Vec<Matrix> {
    let codec = Codec::square(field, n).unwrap();
    (0..codec.size()).map(|c| codec.decode(c)).collect()
}

#[test]
fn hyperplane_pairs_cover_every_target_over_gf2() {
    let started = Instant::now();
    let f = gf(2);
    let mut normals = vec![Matrix::identity(f, 3)];
    for i in 0..3 {
        for j in 0..3 {
            normals.push(Matrix::unit(f, 3, 3, i, j));
        }
    }
    let mut seen: HashSet<Matrix> = normals.iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    while normals.len() < 50 {
        let h = random_hyperplane(f, 3, &mut rng, 1);
        if seen.insert(h.normal().clone()) {
            normals.push(h.normal().clone());
        }
    }
    let targets: Vec<Matrix> = all_matrices(f, 3).into_iter().filter(|m| !m.is_zero()).collect();
    assert_eq!(targets.len(), 511);
    let budget = SearchBudget::default();
    let mut failures = Vec::new();
    for normal in &normals {
        let h = Hyperplane::new(normal.clone()).unwrap();
        if !oracle::product_set(&h.to_affine(), DEFAULT_CEILING)
            .unwrap()
            .is_everything()
        {
            failures.push(format!("oracle product set of {normal:?} is not M_3"));
        }
        for m in &targets {
            match hyperplane_pair_factor(&h, m, &budget) {
                Ok(pf) => {
                    let ok = pairing(normal, &pf.left).is_zero()
                        && pairing(normal, &pf.right).is_zero()
                        && &pf.left * &pf.right == *m;
                    if !ok {
                        failures.push(format!("bad factors for {m:?}"));
                    }
                }
                Err(e) => failures.push(format!("{e} for target {m:?}")),
            }
        }
    }
    finish(
        "hyperplane pair factorization, n=3 GF(2), 50 normals x 511 targets",
        &failures,
        started,
        60,
    );
}

#[test]
fn codim_one_products_span_everything_over_gf2() {
    let started = Instant::now();
    let f = gf(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let normals: Vec<Matrix> = oracle::hyperplane_normals(f, 3).unwrap().collect();
    assert_eq!(normals.len(), 511);
    for normal in &normals {
        let h = Hyperplane::new(normal.clone()).unwrap();
        let v = h.to_affine();
        if !oracle::span_of_products(&v, &v, DEFAULT_CEILING).unwrap().is_full() {
            failures.push(format!("products of {normal:?} do not span"));
        }
        let space = h.subspace();
        for _ in 0..20 {
            let m = random_matrix(f, 3, &mut rng, 1);
            match sum_of_products_decompose(&space, &m) {
                Ok(s) => {
                    let mut total = Matrix::zeros(f, 3, 3);
                    for (b, c) in &s.terms {
                        if !pairing(normal, b).is_zero() || !pairing(normal, c).is_zero() {
                            failures.push(format!("factor outside {normal:?}"));
                        }
                        total = &total + &(b * c);
                    }
                    if total != m {
                        failures.push(format!("terms do not re-sum to {m:?}"));
                    }
                }
                Err(e) => failures.push(format!("{e} for {m:?}")),
            }
        }
    }
    finish(
        "sum of products, all 511 codim-1 subspaces of M_3(GF(2))",
        &failures,
        started,
        120,
    );
}

#[test]
fn commutators_of_codim_one_span_sl_over_gf5() {
    let started = Instant::now();
    let f = gf(5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    for k in 0..100 {
        let n = if k % 2 == 0 { 3 } else { 4 };
        let v = random_hyperplane(f, n, &mut rng, 2).subspace();
        let span = commutator_span(&v);
        let sl = LinearSubspace::sl(f, n);
        let traceless = span.basis().iter().all(|b| b.trace().unwrap().is_zero());
        if span != sl || !traceless || span.dim() != n * n - 1 {
            failures.push(format!("commutator span has dimension {} for n = {n}", span.dim()));
        }
    }
    finish(
        "commutator span = sl_n, 100 codim-1 subspaces over GF(5)",
        &failures,
        started,
        30,
    );
}

#[test]
fn affine_codim_one_generates_all_matrices_over_gf2() {
    let started = Instant::now();
    let f = gf(2);
    let budget = SearchBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut spaces = vec![
        AffineSubspace::level_set(&Matrix::identity(f, 3), f.zero()).unwrap(),
        AffineSubspace::level_set(&Matrix::identity(f, 3), f.one()).unwrap(),
    ];
    while spaces.len() < 22 {
        let h = random_hyperplane(f, 3, &mut rng, 1);
        let value = f.random(&mut rng, 1);
        let v = AffineSubspace::level_set(h.normal(), value).unwrap();
        if !spaces.contains(&v) {
            spaces.push(v);
        }
    }
    let targets = all_matrices(f, 3);
    let invertible = targets.iter().filter(|m| m.is_invertible()).count();
    assert_eq!(invertible, 168);
    let mut failures = Vec::new();
    for (k, v) in spaces.iter().enumerate() {
        let fz = match SemigroupFactorizer::new(v, &budget) {
            Ok(fz) => fz,
            Err(e) => {
                failures.push(format!("space {k}: {e}"));
                continue;
            }
        };
        if k < 2 && !fz.is_exceptional() {
            failures.push(format!("trace space {k} not routed to the exceptional case"));
        }
        let closure = oracle::closure_affine(v, DEFAULT_CEILING).unwrap();
        if !closure.is_everything() {
            failures.push(format!("space {k}: oracle closure has {} elements", closure.len()));
        }
        for m in &targets {
            match fz.factor(m) {
                Ok(chain) => {
                    let product = chain.factors.iter().fold(Matrix::identity(f, 3), |acc, x| &acc * x);
                    if product != *m || !chain.factors.iter().all(|x| v.contains(x)) {
                        failures.push(format!("space {k}: bad chain for {m:?}"));
                    }
                }
                Err(e) => failures.push(format!("space {k}: {e} for {m:?}")),
            }
        }
    }
    finish(
        "semigroup factorization, 22 affine codim-1 spaces x 512 targets over GF(2)",
        &failures,
        started,
        180,
    );
}

#[test]
fn w1_shows_the_codimension_bound_is_tight() {
    let started = Instant::now();
    let f = gf(2);
    let w1 = AffineSubspace::linear(LinearSubspace::w1(f, 3));
    let mut failures = Vec::new();
    let size = w1.cardinality().unwrap();
    if size != 1 << 7 {
        failures.push(format!("W_1 has {size} elements"));
    }
    let closure = oracle::closure_affine(&w1, DEFAULT_CEILING).unwrap();
    let closed = closure.len() as u128 == size && closure.elements().matrices().all(|m| w1.contains(&m));
    if !closed {
        failures.push(format!("closure has {} elements", closure.len()));
    }
    let span = oracle::span_of_products(&w1, &w1, DEFAULT_CEILING).unwrap();
    if span != *w1.translation() || span.is_full() {
        failures.push(format!("product span has dimension {}", span.dim()));
    }
    if !matches!(
        SemigroupFactorizer::new(&w1, &SearchBudget::default()),
        Err(Error::PreconditionViolated(_))
    ) {
        failures.push("codim n-1 accepted by the factorizer".into());
    }
    finish(
        "W_1 closure and product span stay W_1 != M_3 over GF(2)",
        &failures,
        started,
        5,
    );
}

#[test]
fn two_by_two_hyperplanes_classified_over_gf2_and_gf3() {
    let started = Instant::now();
    let mut failures = Vec::new();
    // (p, factorable, conjugate_H0, conjugate_T2plus) among normals up to scaling:
    // |GL_2(p)| / (p - 1), then p + 1 nilpotent lines, then the rest.
    for (p, want) in [(2u64, (6usize, 6usize, 3usize)), (3, (24, 12, 4))] {
        let f = gf(p);
        let mut counts = (0, 0, 0);
        for normal in oracle::hyperplane_normals(f, 2).unwrap() {
            let h = Hyperplane::new(normal).unwrap();
            match matfactor::n2_classify(&h).unwrap().verdict {
                matfactor::N2Verdict::Factorable => counts.0 += 1,
                matfactor::N2Verdict::ConjugateH0 => counts.1 += 1,
                matfactor::N2Verdict::ConjugateT2Plus => counts.2 += 1,
            }
        }
        if counts != want {
            failures.push(format!("GF({p}) class counts {counts:?}, expected {want:?}"));
        }
        let mut cfg = VerifyConfig::new(Theorem::N2class, 2, p);
        cfg.exhaustive = true;
        let report = oracle::verify_theorem(&cfg).unwrap();
        if !report.passed {
            failures.push(format!("GF({p}): {:?}", report.counterexample));
        }
    }
    finish(
        "n=2 hyperplane classification, GF(2) and GF(3), all normals",
        &failures,
        started,
        10,
    );
}

#[test]
fn inverse_pairs_always_found() {
    let started = Instant::now();
    let budget = SearchBudget::default();
    let mut failures = Vec::new();
    let mut exhausted = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = Vec::new();
    let f2 = gf(2);
    for _ in 0..200 {
        cases.push((
            random_hyperplane(f2, 3, &mut rng, 1),
            random_hyperplane(f2, 3, &mut rng, 1),
        ));
    }
    for k in 0..100 {
        let f = if k % 2 == 0 { gf(3) } else { gf(5) };
        cases.push((
            random_hyperplane(f, 3, &mut rng, 2),
            random_hyperplane(f, 3, &mut rng, 2),
        ));
    }
    for (h1, h2) in &cases {
        match inverse_pair(h1, h2, &budget) {
            Ok(p) => {
                let inv = p.inverse();
                let ok = pairing(h1.normal(), &p).is_zero()
                    && inv.as_ref().is_some_and(|q| pairing(h2.normal(), q).is_zero());
                if !ok {
                    failures.push(format!("bad witness for {:?} / {:?}", h1.normal(), h2.normal()));
                }
            }
            Err(Error::BudgetExhausted(_)) => exhausted += 1,
            Err(e) => failures.push(e.to_string()),
        }
    }
    if exhausted > 0 {
        failures.push(format!("{exhausted} budget exhaustions"));
    }
    finish(
        "inverse pairs, 200 GF(2) + 100 GF(3)/GF(5) hyperplane pairs",
        &failures,
        started,
        60,
    );
}

#[test]
fn large_pairs_span_and_degenerate_pairs_recovered() {
    let started = Instant::now();
    let f = gf(5);
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let random_codim = |c: usize, rng: &mut ChaCha8Rng| loop {
        let normals: Vec<Matrix> = (0..c).map(|_| random_matrix(f, n, rng, 2)).collect();
        let dual = LinearSubspace::span(f, n, &normals).unwrap();
        if dual.dim() == c {
            return dual.ortho_complement();
        }
    };
    for _ in 0..100 {
        let cv = rng.gen_range(0..n);
        let cw = rng.gen_range(0..n - cv);
        let v = random_codim(cv, &mut rng);
        let w = random_codim(cw, &mut rng);
        // Independent check: products of basis pairs, stacked and ranked.
        let mut rows = Vec::new();
        for b in v.basis() {
            for c in w.basis() {
                rows.push((b * c).entries().to_vec());
            }
        }
        let stacked = Matrix::from_rows(f, rows).unwrap();
        let span = product_span_two(&v, &w).unwrap();
        if stacked.rank() != n * n || !span.is_full() {
            failures.push(format!("codims ({cv}, {cw}) do not span"));
        }
    }
    for k in 0..20 {
        let p = 1 + k % (n - 1);
        let (pm, qm, rm) = (
            random_invertible(f, n, &mut rng),
            random_invertible(f, n, &mut rng),
            random_invertible(f, n, &mut rng),
        );
        let qi = qm.inverse().unwrap();
        let v = LinearSubspace::v_block(f, n, p).transform(&pm, &qm);
        let w = LinearSubspace::w_block(f, n, p).transform(&qi, &rm);
        match degenerate_pair_witness(&v, &w) {
            Ok(Degeneracy::Degenerate { p: found, pm, qm, rm }) => {
                let q_inv = qm.inverse().unwrap();
                let ok = found == p
                    && LinearSubspace::v_block(f, n, found).transform(&pm, &qm) == v
                    && LinearSubspace::w_block(f, n, found).transform(&q_inv, &rm) == w;
                if !ok {
                    failures.push(format!("instance {k}: witness does not reproduce the pair"));
                }
            }
            Ok(Degeneracy::NonDegenerate) => failures.push(format!("instance {k}: reported non-degenerate")),
            Err(e) => failures.push(format!("instance {k}: {e}")),
        }
    }
    finish(
        "codim sum < n spans M_3; 20 degenerate pairs recovered over GF(5)",
        &failures,
        started,
        60,
    );
}

#[test]
fn rational_hyperplane_pairs() {
    let started = Instant::now();
    let q = FieldSpec::rationals();
    let budget = SearchBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut hyperplanes = vec![Hyperplane::sl(q, 3)];
    while hyperplanes.len() < 21 {
        hyperplanes.push(random_hyperplane(q, 3, &mut rng, 4));
    }
    let mut failures = Vec::new();
    for h in &hyperplanes {
        for _ in 0..20 {
            let m = random_matrix(q, 3, &mut rng, 5);
            match hyperplane_pair_factor(h, &m, &budget) {
                Ok(pf) => {
                    let ok = &pf.left * &pf.right == m
                        && pairing(h.normal(), &pf.left).is_zero()
                        && pairing(h.normal(), &pf.right).is_zero();
                    if !ok {
                        failures.push(format!("bad factors for {m:?}"));
                    }
                }
                Err(e) => failures.push(format!("{e} for {m:?} in {:?}", h.normal())),
            }
        }
    }
    finish(
        "hyperplane pair factorization over Q, sl_3 + 20 integer normals x 20 targets",
        &failures,
        started,
        30,
    );
}
