mod common;

use common::*;
use nalgebra::DMatrix;
use natle::operators::{
    assemble_illumination_system, assemble_reflectance_system, divergence_weighted, gradient,
    GradientField, SmoothnessWeights,
};
use natle::PlanarImage;
use proptest::prelude::*;

fn brute_gradient(img: &PlanarImage) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = img.dims();
    let mut gh = vec![0.0; w * h];
    let mut gv = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            if x < w - 1 {
                gh[y * w + x] = img.get(x + 1, y) - img.get(x, y);
            }
            if y < h - 1 {
                gv[y * w + x] = img.get(x, y + 1) - img.get(x, y);
            }
        }
    }
    (gh, gv)
}

#[test]
fn gradient_matches_brute_force() {
    let img = random_planar(5, 5, 0.0, 1.0, 11);
    let g = gradient(&img);
    let (gh, gv) = brute_gradient(&img);
    assert_eq!(g.gh.data(), gh.as_slice());
    assert_eq!(g.gv.data(), gv.as_slice());
    // replicate boundary: last column / row are zero
    for y in 0..5 {
        assert_eq!(g.gh.get(4, y), 0.0);
    }
    for x in 0..5 {
        assert_eq!(g.gv.get(x, 4), 0.0);
    }
}

#[test]
fn unit_weight_divergence_is_dense_dtd() {
    let (w, h) = (8, 8);
    let img = random_planar(w, h, 0.0, 1.0, 12);
    let out = divergence_weighted(&gradient(&img), &SmoothnessWeights::uniform(w, h, 1.0)).unwrap();
    let (dh, dv) = dense_differences(w, h);
    let v = to_vector(&img);
    let expected = dh.transpose() * &dh * &v + dv.transpose() * &dv * &v;
    assert!(max_abs_diff(out.data(), expected.as_slice()) < 1e-12);

    // interior rows reproduce the negated 5-point Laplacian
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let lap = img.get(x + 1, y) + img.get(x - 1, y) + img.get(x, y + 1) + img.get(x, y - 1)
                - 4.0 * img.get(x, y);
            assert!((out.get(x, y) + lap).abs() < 1e-12);
        }
    }
}

#[test]
fn illumination_system_matches_dense_construction() {
    let (w, h) = (8, 8);
    let weights = SmoothnessWeights {
        ah: random_planar(w, h, 0.0, 20.0, 21),
        av: random_planar(w, h, 0.0, 20.0, 22),
    };
    let sys = assemble_illumination_system(&weights).unwrap();
    let (dh, dv) = dense_differences(w, h);
    let ah = DMatrix::from_diagonal(&to_vector(&weights.ah));
    let av = DMatrix::from_diagonal(&to_vector(&weights.av));
    let expected = DMatrix::identity(w * h, w * h) + dh.transpose() * ah * &dh + dv.transpose() * av * &dv;
    assert!((sys.to_dense() - expected).amax() < 1e-12);
}

#[test]
fn reflectance_system_matches_dense_construction() {
    let (w, h) = (8, 8);
    let sys = assemble_reflectance_system(3.0, w, h).unwrap();
    let (dh, dv) = dense_differences(w, h);
    let expected = DMatrix::identity(w * h, w * h) + 3.0 * (dh.transpose() * &dh + dv.transpose() * &dv);
    assert!((sys.to_dense() - expected).amax() < 1e-12);
}

#[test]
fn apply_matches_dense_product() {
    let (w, h) = (7, 5);
    let weights = SmoothnessWeights {
        ah: random_planar(w, h, 0.0, 5.0, 31),
        av: random_planar(w, h, 0.0, 5.0, 32),
    };
    let sys = assemble_illumination_system(&weights).unwrap();
    let x = random_planar(w, h, -1.0, 1.0, 33);
    let mut out = vec![0.0; w * h];
    sys.apply(x.data(), &mut out);
    let expected = sys.to_dense() * to_vector(&x);
    assert!(max_abs_diff(&out, expected.as_slice()) < 1e-13);
}

#[test]
fn systems_are_spd_with_unit_spectrum_floor() {
    for (i, &(w, h)) in [(1, 1), (1, 6), (5, 1), (4, 4), (9, 7), (12, 12)].iter().enumerate() {
        let weights = SmoothnessWeights {
            ah: random_planar(w, h, 0.0, 15.0, 40 + i as u64),
            av: random_planar(w, h, 0.0, 15.0, 50 + i as u64),
        };
        for sys in [
            assemble_illumination_system(&weights).unwrap(),
            assemble_reflectance_system(3.0, w, h).unwrap(),
        ] {
            let dense = sys.to_dense();
            assert!((&dense - dense.transpose()).amax() == 0.0);
            for r in 0..dense.nrows() {
                let off: f64 = (0..dense.ncols()).filter(|&c| c != r).map(|c| dense[(r, c)].abs()).sum();
                assert!(dense[(r, r)] > off);
            }
            let min_eig = dense.symmetric_eigen().eigenvalues.min();
            assert!(min_eig >= 1.0 - 1e-9, "{w}x{h}: {min_eig}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // <D u, w ∘ D v> = <u, Σ D^T (w ∘ D v)>
    #[test]
    fn adjoint_identity(w in 1usize..9, h in 1usize..9, seed in any::<u64>()) {
        let u = random_planar(w, h, -1.0, 1.0, seed);
        let v = random_planar(w, h, -1.0, 1.0, seed ^ 0x9e37);
        let weights = SmoothnessWeights {
            ah: random_planar(w, h, 0.0, 3.0, seed ^ 0x51),
            av: random_planar(w, h, 0.0, 3.0, seed ^ 0x52),
        };
        let du = gradient(&u);
        let dv = gradient(&v);
        let lhs: f64 = du.gh.data().iter().zip(dv.gh.data()).zip(weights.ah.data())
            .chain(du.gv.data().iter().zip(dv.gv.data()).zip(weights.av.data()))
            .map(|((a, b), c)| a * b * c)
            .sum();
        let div = divergence_weighted(&dv, &weights).unwrap();
        let rhs: f64 = u.data().iter().zip(div.data()).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn vanishing_weights_approach_identity(scale in 0.0f64..1e-9, seed in any::<u64>()) {
        let w = SmoothnessWeights::uniform(6, 5, scale);
        let sys = assemble_illumination_system(&w).unwrap();
        let b = random_planar(6, 5, 0.0, 1.0, seed);
        let x = natle::solve_spd(&sys, &b, &natle::SolveConfig::default()).unwrap().x;
        prop_assert!(max_abs_diff(x.data(), b.data()) < 1e-8);
    }
}

#[test]
fn zero_field_with_weights() {
    let field = GradientField {
        gh: PlanarImage::zeros(4, 4),
        gv: PlanarImage::zeros(4, 4),
    };
    let out = divergence_weighted(&field, &SmoothnessWeights::uniform(4, 4, 5.0)).unwrap();
    assert_eq!(out, PlanarImage::zeros(4, 4));
}
