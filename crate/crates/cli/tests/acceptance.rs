//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use num_integer::Integer;
use pdcorr_core::analysis::{classify_valuedness, count_nu, lemma6_check, verify_theorem1};
use pdcorr_core::decimation::{
    coprime_coset_leaders, coset_leader, enumerate_decimations, normalize_l, params_for,
    solve_congruence,
};
use pdcorr_core::gf2m::{build_field, Field};
use pdcorr_core::quadform::{
    h_census, lemma5_counts, rank_census, rank_counts, FormParams, QuadForm, RootField,
};
use pdcorr_core::sequences::{Correlator, Route};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn field(m: u32) -> Field {
    build_field(m, None).expect("default field")
}

fn normalized_pairs(max_n: u32) -> Vec<(u32, u32)> {
    (2..=max_n)
        .flat_map(|n| {
            (1..n)
                .filter(move |&l| normalize_l(l, n) == Ok(l))
                .map(move |l| (n, l))
        })
        .collect()
}

fn closed_form_spectra() -> Outcome {
    let mut checked = 0;
    let mut slow = Duration::ZERO;
    for m in [6u32, 10, 12, 14] {
        let start = Instant::now();
        let f = field(m);
        for p in enumerate_decimations(m / 2).map_err(|e| e.to_string())? {
            let r = verify_theorem1(&f, &p).map_err(|e| e.to_string())?;
            ensure(r.spectrum_matches, || {
                format!("m={m} d={}: {:?} vs {:?}", p.d, r.empirical, r.predicted)
            })?;
            checked += 1;
        }
        if m <= 12 {
            slow += start.elapsed();
        }
    }
    ensure(slow < Duration::from_secs(10), || {
        format!("m <= 12 took {slow:?}")
    })?;
    Ok(format!("{checked} decimations at m in {{6, 10, 12, 14}}"))
}

fn valuedness() -> Outcome {
    let mut checked = 0;
    for m in (4u32..=14).step_by(2) {
        let f = field(m);
        let c = Correlator::new(&f);
        for p in enumerate_decimations(m / 2).map_err(|e| e.to_string())? {
            let v = classify_valuedness(&c.spectrum(p.d as u64).map_err(|e| e.to_string())?);
            let want = if p.k == 1 { 3 } else { 4 };
            ensure(v == want, || {
                format!("m={m} d={} k={}: {v} values", p.d, p.k)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} decimations, m <= 14"))
}

fn rank_censuses() -> Outcome {
    let start = Instant::now();
    let examples = [((3u32, 2u32), (3u64, 4u64)), ((6, 4), (47, 16))];
    for ((n, l), want) in examples {
        let c = rank_census(&field(2 * n), FormParams::new(n, l).unwrap())
            .map_err(|e| e.to_string())?;
        let got = (c.full_rank(), c.deficient_rank());
        ensure(got == want, || {
            format!("(n={n}, l={l}): {got:?}, want {want:?}")
        })?;
    }
    let pairs = normalized_pairs(9);
    for &(n, l) in &pairs {
        let form = FormParams::new(n, l).unwrap();
        let c = rank_census(&field(2 * n), form).map_err(|e| e.to_string())?;
        let got = (c.full_rank(), c.deficient_rank());
        ensure(got == rank_counts(n, form.k), || {
            format!("(n={n}, l={l}): {got:?}")
        })?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!(
        "(3, 4), (47, 16) and {} pairs with n <= 9 in {took:.2?}",
        pairs.len()
    ))
}

fn h_root_censuses() -> Outcome {
    // (q, mu) = (2, 3), (2, 5), (4, 3)
    let mut summary = Vec::new();
    for (m, t) in [(6u32, 5u32), (10, 7), (12, 10)] {
        let n = m / 2;
        let g = t.gcd(&n);
        let q = 1u64 << g;
        let want = lemma5_counts(q, n / g).map_err(|e| e.to_string())?;
        let census = h_census(&field(m), t);
        let got = (
            census.get(0),
            census.get(1),
            census.get(2),
            census.get(q + 1),
        );
        ensure(got == (want.n0, want.n1, want.n2, want.n_q1), || {
            format!("q={q} mu={}: {got:?}", n / g)
        })?;
        ensure(census.scanned() == want.total(), || {
            format!("q={q}: stray root counts {:?}", census.counts)
        })?;
        summary.push(format!("q={q},mu={}: {got:?}", n / g));
    }
    Ok(summary.join("; "))
}

fn route_equivalence() -> Outcome {
    let mut shifts = 0u64;
    let mut quad = 0u64;
    for m in [4u32, 6, 8, 10] {
        let f = field(m);
        let c = Correlator::new(&f);
        let n = m / 2;
        let big_n = (1u64 << n) - 1;
        for d in (1..big_n).filter(|d| d.gcd(&big_n) == 1) {
            let err = |e: pdcorr_core::sequences::SequenceError| e.to_string();
            let direct = c.values(d, Route::Direct).map_err(err)?;
            let charsum = c.values(d, Route::CharacterSum).map_err(err)?;
            ensure(direct == charsum, || {
                format!("m={m} d={d}: direct {direct:?} charsum {charsum:?}")
            })?;
            if params_for(d, n).map_err(|e| e.to_string())?.is_some() {
                let qf = c.values(d, Route::QuadraticForm).map_err(err)?;
                ensure(direct == qf, || {
                    format!("m={m} d={d}: direct {direct:?} quadform {qf:?}")
                })?;
                quad += big_n;
            }
            shifts += big_n;
        }
    }
    Ok(format!(
        "{shifts} (d, shift) pairs on two routes, {quad} also via the quadratic form"
    ))
}

fn moments_and_nu() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for m in [8u32, 10, 12] {
        let f = field(m);
        let c = Correlator::new(&f);
        let big_n = (1u64 << (m / 2)) - 1;
        let mut done = 0;
        while done < 50 {
            let d = rng.random_range(1..big_n);
            if d.gcd(&big_n) != 1 {
                continue;
            }
            let nu = count_nu(&f, d).map_err(|e| e.to_string())?;
            let spec = c.spectrum(d).map_err(|e| e.to_string())?;
            ensure(
                lemma6_check(&spec, nu, m).map_err(|e| e.to_string())?,
                || format!("m={m} d={d} nu={nu}"),
            )?;
            done += 1;
        }
    }
    let mut enumerated = 0;
    for m in (4u32..=14).step_by(2) {
        let f = field(m);
        for p in enumerate_decimations(m / 2).map_err(|e| e.to_string())? {
            let nu = count_nu(&f, p.d as u64).map_err(|e| e.to_string())?;
            ensure(nu == (1 << p.k) - 2, || {
                format!("m={m} d={}: nu={nu}, k={}", p.d, p.k)
            })?;
            enumerated += 1;
        }
    }
    Ok(format!(
        "150 random d at m in {{8, 10, 12}}; nu = 2^k - 2 for {enumerated} decimations"
    ))
}

fn root_propositions() -> Outcome {
    let mut forms = 0;
    for (n, l) in normalized_pairs(5) {
        let f = field(2 * n);
        let form = FormParams::new(n, l).unwrap();
        let q = 1u64 << form.k;
        let e = (1u32 << form.k) - 1;
        for a in f.subfield_units(n) {
            let rho =
                QuadForm::new(&f, form, f.element(a as u64).unwrap()).map_err(|e| e.to_string())?;
            let ctx = || format!("n={n} l={l} a={a:#x}");
            let roots = rho.roots_g(RootField::Full);
            let ng = roots.len() as u64;
            ensure([0, 2, q + 1].contains(&ng), || {
                format!("{}: {ng} roots of g", ctx())
            })?;
            for (j, &y1) in roots.iter().enumerate() {
                for &y2 in &roots[j + 1..] {
                    ensure(f.is_power_bits(f.mul_bits(y1, y2), e), || {
                        format!("{}: product not a power", ctx())
                    })?;
                }
            }
            if ng >= 3 {
                ensure(roots.iter().all(|&y| f.is_power_bits(y, e)), || {
                    format!("{}: root not a power", ctx())
                })?;
            }
            let nf = rho.count_roots_f();
            ensure(nf == 1 || nf == q * q, || {
                format!("{}: {nf} roots of f", ctx())
            })?;
            ensure((nf == 1) == (ng == 0 || ng == 2), ctx)?;
            ensure((nf == q * q) == (ng == q + 1), ctx)?;
            let half = rho.count_roots_g(RootField::Half);
            ensure(half % 2 == ng % 2, || {
                format!("{}: parity {half} vs {ng}", ctx())
            })?;
            forms += 1;
        }
    }
    Ok(format!("{forms} forms at m in {{6, 10}}"))
}

struct Row {
    d: u64,
    num_values: usize,
    matched: bool,
}

fn run_search(m: u32) -> Result<(Vec<Row>, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pdcorr"))
        .args(["search", "--m", &m.to_string(), "--max-values", "4"])
        .output()
        .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(out.status.success(), || {
        format!("m={m}: exit {:?}", out.status.code())
    })?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        rows.push(Row {
            d: rec[1].parse().map_err(|_| format!("bad d {:?}", &rec[1]))?,
            num_values: rec[2]
                .parse()
                .map_err(|_| format!("bad count {:?}", &rec[2]))?,
            matched: !rec[4].is_empty(),
        });
    }
    ensure(took < Duration::from_secs(60), || {
        format!("m={m}: took {took:?}")
    })?;
    Ok((rows, took))
}

fn search_replication() -> Outcome {
    let (rows8, t8) = run_search(8)?;
    let r7 = rows8.iter().find(|r| r.d == 7).ok_or("m=8: d=7 missing")?;
    ensure(!r7.matched && r7.num_values <= 4, || {
        "m=8: d=7 is matched".into()
    })?;

    let (rows16, t16) = run_search(16)?;
    ensure(rows16.iter().all(|r| !r.matched), || {
        "m=16: a listed d is matched".into()
    })?;
    let solvable: Vec<u64> = coprime_coset_leaders(8)
        .into_iter()
        .filter(|&d| !solve_congruence(d, 8).unwrap().is_empty())
        .collect();
    ensure(solvable.is_empty(), || {
        format!("m=16: {solvable:?} solve the congruence")
    })?;

    let (rows12, t12) = run_search(12)?;
    let listed: BTreeMap<u64, bool> = rows12.iter().map(|r| (r.d, r.matched)).collect();
    let family = enumerate_decimations(6).map_err(|e| e.to_string())?;
    for p in &family {
        let leader = coset_leader(p.d as u64, 6);
        ensure(listed.get(&leader) == Some(&true), || {
            format!("m=12: d={} (leader {leader}) missing", p.d)
        })?;
    }
    Ok(format!(
        "m=8 d=7 unmatched ({t8:.2?}); m=16 {} rows, none matched ({t16:.2?}); m=12 covers {} decimations ({t12:.2?})",
        rows16.len(),
        family.len()
    ))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        (
            "spectra equal the closed-form distribution",
            closed_form_spectra,
        ),
        ("three values iff k = 1, otherwise four", valuedness),
        ("rank censuses equal the closed forms", rank_censuses),
        ("h_c root censuses equal the closed forms", h_root_censuses),
        (
            "direct, character-sum and quadratic-form routes agree",
            route_equivalence,
        ),
        ("moment identities and nu = 2^k - 2", moments_and_nu),
        (
            "root-count, power, dichotomy and parity properties",
            root_propositions,
        ),
        ("decimation search", search_replication),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} [{detail}] ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
