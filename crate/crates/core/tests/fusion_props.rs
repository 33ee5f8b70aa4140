mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use pano_core::fusion::{
    biproj_fuse_with_mask, cee_fuse, cee_fuse_with_gates, concat_fuse, conv2d, fuse, skip_fuse, ConcatParams,
    ConvLayer, FusionParams, FusionVariant,
};
use pano_core::resample::{build_c2e_grid, C2eBoundary};
use pano_core::{CubeFeatureMap, FeatureMap};

fn random_map(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize, scale: f64) -> FeatureMap {
    FeatureMap::from_fn(c, h, w, |_, _, _| rng.gen_range(-scale..scale))
}

#[test]
fn cee_with_idle_branches_is_half_of_concat() {
    let c = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let FusionParams::Cee(mut p) = FusionParams::zeros(FusionVariant::Cee, c).unwrap() else { unreachable!() };
    let reduce = ConvLayer::random(2 * c, c, 1, false, &mut rng);
    p.fuse.weights_mut().copy_from_slice(reduce.weights());
    let (fe, fc) = (random_map(&mut rng, c, 6, 12, 1.0), random_map(&mut rng, c, 6, 12, 1.0));
    let (out, gates) = cee_fuse_with_gates(&fe, &fc, &p).unwrap();
    assert!(gates.iter().all(|&g| g == 0.5));
    let concat = concat_fuse(&fe, &fc, &ConcatParams { reduce }).unwrap();
    assert!(max_abs_diff(out.data(), &concat.map(|v| 0.5 * v).into_data()) < 1e-12);
}

#[test]
fn skip_fusion_shapes_and_determinism() {
    let (c, h, r) = (16, 64, 32);
    let w = 2 * h;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let erp = random_map(&mut rng, c, h, w, 1.0);
    let cube = CubeFeatureMap::from_fn(c, r, |_, _, _, _| rng.gen_range(-1.0..1.0));
    let grid = build_c2e_grid(h, w, r).unwrap();
    for v in FusionVariant::ALL {
        let a = skip_fuse(&erp, &cube, &grid, &FusionParams::random(v, c, 42).unwrap(), C2eBoundary::PaddedFace).unwrap();
        let b = skip_fuse(&erp, &cube, &grid, &FusionParams::random(v, c, 42).unwrap(), C2eBoundary::PaddedFace).unwrap();
        assert_eq!(a.shape(), (c, h, w), "{v}");
        assert_eq!(a, b, "{v} not deterministic");
        let other = skip_fuse(&erp, &cube, &grid, &FusionParams::random(v, c, 43).unwrap(), C2eBoundary::PaddedFace).unwrap();
        assert_ne!(a, other, "{v} ignores the seed");
    }
}

#[test]
fn skip_fusion_rejects_mismatched_inputs() {
    let grid = build_c2e_grid(16, 32, 8).unwrap();
    let params = FusionParams::zeros(FusionVariant::Concat, 4).unwrap();
    let cube = CubeFeatureMap::zeros(4, 8);
    assert!(skip_fuse(&FeatureMap::zeros(4, 8, 16), &cube, &grid, &params, C2eBoundary::PaddedFace).is_err());
    assert!(skip_fuse(&FeatureMap::zeros(3, 16, 32), &cube, &grid, &params, C2eBoundary::PaddedFace).is_err());
    assert!(skip_fuse(&FeatureMap::zeros(4, 16, 32), &CubeFeatureMap::zeros(3, 8), &grid, &params, C2eBoundary::PaddedFace).is_err());
    assert!(FusionParams::zeros(FusionVariant::Cee, 12).is_err());
    assert!(cee_fuse(
        &FeatureMap::zeros(8, 4, 8),
        &FeatureMap::zeros(8, 4, 9),
        match &FusionParams::zeros(FusionVariant::Cee, 8).unwrap() {
            FusionParams::Cee(p) => p,
            _ => unreachable!(),
        }
    )
    .is_err());
}

#[test]
fn module_names_round_trip() {
    for v in FusionVariant::ALL {
        assert_eq!(v.name().parse::<FusionVariant>().unwrap(), v);
    }
    assert!("sum".parse::<FusionVariant>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conv_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0, k in prop::sample::select(vec![1usize, 3])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = ConvLayer::random(3, 4, k, false, &mut rng);
        let a = random_map(&mut rng, 3, 5, 7, 1.0);
        let b = random_map(&mut rng, 3, 5, 7, 1.0);
        let mix = FeatureMap::new(3, 5, 7, a.data().iter().zip(b.data()).map(|(x, y)| alpha * x + beta * y).collect()).unwrap();
        let (ya, yb, ym) = (conv2d(&a, &layer).unwrap(), conv2d(&b, &layer).unwrap(), conv2d(&mix, &layer).unwrap());
        for ((m, x), y) in ym.data().iter().zip(ya.data()).zip(yb.data()) {
            prop_assert!((m - (alpha * x + beta * y)).abs() < 1e-9);
        }
    }

    #[test]
    fn gates_and_masks_stay_strictly_inside_unit_interval(seed in any::<u64>(), scale in prop::sample::select(vec![1.0f64, 1e3, 1e6])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = 8;
        let (fe, fc) = (random_map(&mut rng, c, 4, 8, scale), random_map(&mut rng, c, 4, 8, scale));
        let FusionParams::Cee(cp) = FusionParams::random(FusionVariant::Cee, c, seed).unwrap() else { unreachable!() };
        let (_, gates) = cee_fuse_with_gates(&fe, &fc, &cp).unwrap();
        prop_assert!(gates.iter().all(|&g| g > 0.0 && g < 1.0));
        let FusionParams::BiProj(bp) = FusionParams::random(FusionVariant::BiProj, c, seed).unwrap() else { unreachable!() };
        let (_, mask) = biproj_fuse_with_mask(&fe, &fc, &bp).unwrap();
        prop_assert_eq!(mask.shape(), (1, 4, 8));
        prop_assert!(mask.data().iter().all(|&m| m > 0.0 && m < 1.0));
    }

    #[test]
    fn fusion_matches_oracles_on_random_inputs(seed in any::<u64>(), h in 1usize..6, w in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = 8;
        let (fe, fc) = (random_map(&mut rng, c, h, w, 2.0), random_map(&mut rng, c, h, w, 2.0));
        for v in FusionVariant::ALL {
            let params = FusionParams::random(v, c, seed).unwrap();
            let got = fuse(&fe, &fc, &params).unwrap();
            let want = match &params {
                FusionParams::Concat(p) => concat_oracle(&fe, &fc, &p.reduce),
                FusionParams::BiProj(p) => biproj_oracle(&fe, &fc, p),
                FusionParams::Cee(p) => cee_oracle(&fe, &fc, p),
            };
            prop_assert!(max_abs_diff(got.data(), want.data()) < 1e-8);
        }
    }
}
