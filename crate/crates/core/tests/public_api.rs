use gauss4d_core::eval::{evaluate_sequences, psnr};
use gauss4d_core::io::{decode_sequence, encode_sequence, read_sequence, write_sequence};
use gauss4d_core::losses::{frame_loss, LossConfig, LossReport, PerceptualMode, SupervisionView};
use gauss4d_core::par::{with_mode, ExecMode};
use gauss4d_core::render::{oracle_render, render};
use gauss4d_core::synth::fixtures::{random_gaussians, random_pose};
use gauss4d_core::synth::{build_rig_at, generate_scene, motion_score, SceneSpec};
use gauss4d_core::{CameraPose, Gaussian, GaussianFrame, GaussianSequence, RenderConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scene(seed: u64, n: usize) -> Vec<Gaussian> {
    random_gaussians(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

fn sequence(seed: u64, frames: usize, n: usize) -> GaussianSequence {
    let frames = (0..frames)
        .map(|t| GaussianFrame::new(t as u32, scene(seed * 31 + t as u64, n)))
        .collect();
    GaussianSequence::new(8.0, frames).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tiled_render_matches_oracle(seed in 0u64..10_000, n in 1usize..24) {
        let gs = scene(seed, n);
        let pose = random_pose(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xABCD), 20);
        let cfg = RenderConfig::default();
        let a = render(&gs, &pose, &cfg);
        let b = oracle_render(&gs, &pose, &cfg);
        for (x, y) in a.rgb.data.iter().zip(&b.rgb.data).chain(a.alpha.data.iter().zip(&b.alpha.data)) {
            prop_assert!((x - y).abs() <= 1e-5, "{x} vs {y}");
        }
    }

    #[test]
    fn g4ds_round_trip_and_truncation(seed in 0u64..10_000, frames in 1usize..4, n in 1usize..6) {
        let seq = sequence(seed, frames, n);
        let bytes = encode_sequence(&seq).unwrap();
        let back = decode_sequence(&bytes).unwrap();
        prop_assert_eq!(encode_sequence(&back).unwrap(), bytes.clone());
        let cut = (seed as usize) % bytes.len();
        prop_assert!(decode_sequence(&bytes[..cut]).is_err());
    }

    #[test]
    fn loss_total_is_sum_of_terms(seed in 0u64..10_000, lambda in 0.0f64..4.0) {
        let gs = scene(seed, 5);
        let target = scene(seed + 1, 5);
        let pose = CameraPose::orbit(seed as f64 % 360.0, 10.0, 16);
        let cfg = LossConfig { lambda_perceptual: lambda, supervision_resolution: 16, ..LossConfig::default() };
        let t = render(&target, &pose, &cfg.render);
        let views = [SupervisionView { rgb: &t.rgb, alpha: &t.alpha, pose: &pose }];
        let (per_view, _) = frame_loss(&gs, &views, &cfg, 1.0, false).unwrap();
        let v = per_view[0];
        let doubled = LossConfig { lambda_perceptual: 2.0 * lambda, ..cfg };
        let (per_view2, _) = frame_loss(&gs, &views, &doubled, 1.0, false).unwrap();
        prop_assert!(v.rgb_mse >= 0.0 && v.perceptual >= 0.0 && v.mask_mse >= 0.0);
        prop_assert_eq!(per_view2[0].perceptual, v.perceptual);
        let r = LossReport::from_views(per_view.clone(), lambda);
        let r2 = LossReport::from_views(per_view2, 2.0 * lambda);
        prop_assert!((r.total - (v.rgb_mse + lambda * v.perceptual + v.mask_mse)).abs() <= 1e-9);
        prop_assert!((r2.total - r.total - lambda * r.perceptual).abs() <= 1e-9);
        let (same, _) = frame_loss(&target, &views, &cfg, 1.0, false).unwrap();
        prop_assert_eq!(same[0].rgb_mse + same[0].perceptual + same[0].mask_mse, 0.0);
    }
}

#[test]
fn parallel_and_sequential_renders_agree_bitwise() {
    let gs = scene(5, 300);
    let pose = CameraPose::orbit(30.0, 15.0, 64);
    let cfg = RenderConfig::default();
    let a = with_mode(ExecMode::Parallel, || render(&gs, &pose, &cfg));
    let b = with_mode(ExecMode::Sequential, || render(&gs, &pose, &cfg));
    assert_eq!(a.rgb.data, b.rgb.data);
    assert_eq!(a.alpha.data, b.alpha.data);
}

#[test]
fn perceptual_off_contributes_nothing() {
    let gs = scene(9, 5);
    let target = scene(10, 5);
    let pose = CameraPose::orbit(0.0, 0.0, 16);
    let cfg = LossConfig {
        perceptual_mode: PerceptualMode::Off,
        supervision_resolution: 16,
        ..LossConfig::default()
    };
    let t = render(&target, &pose, &cfg.render);
    let views = [SupervisionView { rgb: &t.rgb, alpha: &t.alpha, pose: &pose }];
    let (v, _) = frame_loss(&gs, &views, &cfg, 1.0, false).unwrap();
    assert_eq!(v[0].perceptual, 0.0);
    assert!(v[0].rgb_mse > 0.0);
}

#[test]
fn generated_scenes_are_deterministic_and_file_round_trips() {
    let a = generate_scene(&SceneSpec::template(3, 99, 1.0, 24.0)).unwrap();
    let b = generate_scene(&SceneSpec::template(3, 99, 1.0, 24.0)).unwrap();
    assert_eq!(encode_sequence(&a).unwrap(), encode_sequence(&b).unwrap());
    assert_eq!(a.len(), 24);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.g4ds");
    write_sequence(&a, &path).unwrap();
    assert_eq!(encode_sequence(&read_sequence(&path).unwrap()).unwrap(), encode_sequence(&a).unwrap());
}

#[test]
fn static_template_has_zero_motion() {
    let rig = build_rig_at(0, 32);
    let still = generate_scene(&SceneSpec::template(11, 4, 1.0, 24.0)).unwrap();
    assert_eq!(motion_score(&still, &rig).unwrap(), 0.0);
    let moving = generate_scene(&SceneSpec::template(0, 4, 1.0, 24.0)).unwrap();
    assert!(motion_score(&moving, &rig).unwrap() > 0.0);
}

#[test]
fn identical_sequences_evaluate_perfectly() {
    let seq = sequence(2, 4, 20);
    let poses: Vec<CameraPose> = [0.0, 90.0].iter().map(|&a| CameraPose::orbit(a, 0.0, 24)).collect();
    let r = evaluate_sequences("s", &seq, &seq, &poses, &RenderConfig::default()).unwrap();
    assert_eq!(r.per_frame_psnr.len(), 4);
    let img = render(&seq.frames[0].gaussians, &poses[0], &RenderConfig::default()).rgb;
    assert_eq!(r.mean_psnr, psnr(&img, &img).unwrap());
    assert!(r.flicker.is_some());
    let short = sequence(2, 3, 20);
    assert!(evaluate_sequences("s", &short, &seq, &poses, &RenderConfig::default()).is_err());
}
