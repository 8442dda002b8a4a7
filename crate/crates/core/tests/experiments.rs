use orlicz_morrey::experiments::{ball_family_with, run, ExperimentKind, ExperimentSpec};
use orlicz_morrey::norms::{morrey_norm, vector_lq_pointwise, MorreyShape};
use orlicz_morrey::operators::{apply_cz_vector, CZKernel};
use orlicz_morrey::{Grid, GridFunction, VectorGridFunction, Weight, YoungFunction};

fn grid() -> Grid {
    Grid::new(-8.0, 8.0, 2048).unwrap()
}

fn bump(g: Grid, c: f64) -> GridFunction {
    GridFunction::from_fn(g, |x| (-8.0 * (x - c) * (x - c)).exp()).unwrap()
}

fn vector_ratio(f: &VectorGridFunction, q: f64) -> f64 {
    let g = *f.grid();
    let (phi, w) = (YoungFunction::Power { p: 2.0 }, Weight::PowerAbs { alpha: 0.5, center: 0.0 });
    let shape = MorreyShape::power_radius(0.5);
    let balls = ball_family_with(&g, 16);
    let tf = apply_cz_vector(&CZKernel::hilbert(), f).unwrap();
    let num = morrey_norm(&vector_lq_pointwise(&tf, q).unwrap(), &phi, &shape, &w, &balls, false).unwrap();
    let den = morrey_norm(&vector_lq_pointwise(f, q).unwrap(), &phi, &shape, &w, &balls, false).unwrap();
    num.value / den.value
}

#[test]
fn shifted_copies_of_one_bump_have_a_finite_ratio() {
    let g = grid();
    let comps: Vec<_> = (0..8).map(|k| bump(g, -2.0 + 0.5 * k as f64)).collect();
    let r = vector_ratio(&VectorGridFunction::new(comps).unwrap(), 2.0);
    assert!(r.is_finite() && r > 0.0, "{r}");
}

#[test]
fn component_order_does_not_matter() {
    let g = grid();
    let comps: Vec<_> = [-1.0, 0.3, 1.7, 2.5].iter().map(|&c| bump(g, c)).collect();
    let mut reversed = comps.clone();
    reversed.reverse();
    let a = vector_ratio(&VectorGridFunction::new(comps).unwrap(), 3.0);
    let b = vector_ratio(&VectorGridFunction::new(reversed).unwrap(), 3.0);
    assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
}

#[test]
fn identical_specs_give_identical_reports() {
    let mut spec = ExperimentSpec::new("cz", ExperimentKind::Cz, grid(), 11);
    spec.corpus_size = 3;
    spec.ball_family = ball_family_with(&spec.grid, 16);
    let a = run(&spec).unwrap();
    let b = run(&spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.ratio_per_function.len(), 3);
    assert!(a.refinement_drift.is_finite());
}

#[test]
fn balls_outside_the_inner_half_are_rejected() {
    let mut spec = ExperimentSpec::new("m", ExperimentKind::Maximal, grid(), 1);
    spec.ball_family = vec![orlicz_morrey::Ball::new(5.0, 1.0).unwrap()];
    assert!(run(&spec).is_err());
}
