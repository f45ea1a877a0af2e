//! End-to-end: scenario -> seeded ensemble -> frequencies -> goodness of fit.

use std::f64::consts::PI;

use tsvsim::scenarios::{self, ThreeBoxSearch};
use tsvsim::simulate::{postselect, run_ensemble, TimeLabel};
use tsvsim::stats::{chi_square_gof, frequencies};

#[test]
fn sharp_shanks_frequencies_fit_abl() {
    let s = scenarios::sharp_shanks(PI / 4.0, PI / 6.0);
    let rec = run_ensemble(&s, 20_000, 7).unwrap();
    let selected = postselect(&rec, 1.0).unwrap();
    let fit = chi_square_gof(
        &frequencies(&selected, TimeLabel::T).unwrap(),
        &s.abl_prediction().unwrap(),
    )
    .unwrap();
    assert!(fit.agrees_with_reference(), "{fit:?}");
}

#[test]
fn three_box_search_c_fits_one_fifth() {
    let s = scenarios::three_box(ThreeBoxSearch::C);
    let rec = run_ensemble(&s, 30_000, 11).unwrap();
    let selected = postselect(&rec, 1.0).unwrap();
    let freq = frequencies(&selected, TimeLabel::T).unwrap();
    assert!(freq.interval_contains(1.0, 0.2));
    assert!(chi_square_gof(&freq, &s.abl_prediction().unwrap())
        .unwrap()
        .agrees_with_reference());
}

#[test]
fn post_selection_rate_matches_final_born_weight() {
    // Without a search, Prob(post) = |⟨Ψ₂|Ψ₁⟩|² = 1/9.
    let s = scenarios::three_box(ThreeBoxSearch::None);
    let rec = run_ensemble(&s, 90_000, 3).unwrap();
    let kept = postselect(&rec, 1.0).unwrap().len() as f64 / rec.len() as f64;
    assert!((kept - 1.0 / 9.0).abs() < 0.004, "{kept}");
}

#[test]
fn same_seed_same_ensemble() {
    let s = scenarios::double_sigma_x();
    let a = run_ensemble(&s, 500, 1).unwrap();
    let b = run_ensemble(&s, 500, 1).unwrap();
    let c = run_ensemble(&s, 500, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.to_csv(), c.to_csv());
}
