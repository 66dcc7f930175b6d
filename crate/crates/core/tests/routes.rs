use num_integer::Integer;
use pdcorr_core::decimation::{coset_leader, enumerate_decimations, params_for};
use pdcorr_core::gf2m::build_field;
use pdcorr_core::sequences::{
    correlation_via_quadform, cross_correlation_charsum, CorrelationSpectrum, Correlator, Route,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coprime_ds(n: u32) -> Vec<u64> {
    let big_n = (1u64 << n) - 1;
    (1..big_n).filter(|d| d.gcd(&big_n) == 1).collect()
}

#[test]
fn routes_agree_exhaustively_small_m() {
    for m in [4u32, 6, 8, 10] {
        let field = build_field(m, None).unwrap();
        let c = Correlator::new(&field);
        let n = m / 2;
        for d in coprime_ds(n) {
            let direct = c.values(d, Route::Direct).unwrap();
            assert_eq!(
                direct,
                c.values(d, Route::CharacterSum).unwrap(),
                "m={m} d={d}"
            );
            assert_eq!(direct, c.values(d, Route::Folded).unwrap(), "m={m} d={d}");
            if params_for(d, n).unwrap().is_some() {
                assert_eq!(
                    direct,
                    c.values(d, Route::QuadraticForm).unwrap(),
                    "m={m} d={d}"
                );
            }
        }
    }
}

#[test]
fn routes_agree_on_sampled_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in [12u32, 14] {
        let field = build_field(m, None).unwrap();
        let c = Correlator::new(&field);
        let n = m / 2;
        let period = (1usize << n) - 1;
        for p in enumerate_decimations(n).unwrap() {
            let d = p.d as u64;
            let folded = c.values(d, Route::Folded).unwrap();
            for tau in sample(&mut rng, period, 32) {
                let a = c.shift_to_a(d, tau as u64);
                let direct = c.direct(d, tau as u64).unwrap();
                assert_eq!(direct, folded[tau], "m={m} d={d} tau={tau}");
                assert_eq!(direct, cross_correlation_charsum(&field, d, a).unwrap());
                assert_eq!(direct, correlation_via_quadform(&field, &p, a).unwrap());
            }
        }
    }
}

#[test]
fn charsum_matches_quadform_for_every_a() {
    for n in [3u32, 5, 6] {
        let field = build_field(2 * n, None).unwrap();
        for p in enumerate_decimations(n).unwrap() {
            for a in field.subfield_units(n) {
                let a = field.element(a as u64).unwrap();
                assert_eq!(
                    cross_correlation_charsum(&field, p.d as u64, a).unwrap(),
                    correlation_via_quadform(&field, &p, a).unwrap(),
                    "n={n} d={}",
                    p.d
                );
            }
        }
    }
}

#[test]
fn iterating_a_gives_same_multiset_as_iterating_tau() {
    let field = build_field(10, None).unwrap();
    let c = Correlator::new(&field);
    for d in [7u64, 11, 3, 5] {
        let by_tau = c.spectrum_by(d, Route::Direct).unwrap();
        let by_a = field.subfield_units(5).into_iter().map(|a| {
            cross_correlation_charsum(&field, d, field.element(a as u64).unwrap()).unwrap()
        });
        assert_eq!(by_tau, CorrelationSpectrum::from_values(5, d as u32, by_a));
    }
}

#[test]
fn spectrum_is_coset_invariant() {
    for m in [4u32, 6, 8, 10] {
        let field = build_field(m, None).unwrap();
        let c = Correlator::new(&field);
        let n = m / 2;
        let big_n = (1u64 << n) - 1;
        for d in coprime_ds(n) {
            let a = c.spectrum(d).unwrap();
            let b = c.spectrum(2 * d % big_n).unwrap();
            assert_eq!(a.entries(), b.entries(), "m={m} d={d}");
            let leader = c.spectrum(coset_leader(d, n)).unwrap();
            assert_eq!(a.entries(), leader.entries());
        }
    }
}

#[test]
fn spectra_are_independent_of_thread_count() {
    let field = build_field(12, None).unwrap();
    let c = Correlator::new(&field);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let single = pool.install(|| c.values(26, Route::Folded).unwrap());
    assert_eq!(single, c.values(26, Route::Folded).unwrap());
}
