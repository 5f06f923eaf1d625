use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gauss4d_core::synth::{DatasetManifest, MANIFEST_FILE};
use gauss4d_model::{load_checkpoint, Model};

fn gauss4d(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauss4d"))
        .current_dir(dir)
        .args(args)
        .env_remove("GAUSS4D_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gauss4d(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn gen(dir: &Path, out: &str, extra: &[&str]) {
    let mut args = vec!["synth", "gen", "--scenes", "2", "--seed", "7", "--duration", "1", "--resolution", "32", "--out", out];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

#[test]
fn help_documents_flags_and_unknown_flags_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let help = ok(tmp.path(), &["train", "base", "--help"]);
    for flag in ["--freeze-backbone", "--no-temporal", "--random-init", "--init", "--config", "--threads", "--steps"] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
    let out = gauss4d(tmp.path(), &["synth", "gen", "--scenes", "1", "--out", "x", "--bogus"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&gauss4d(tmp.path(), &["frobnicate"])), 2);
}

#[test]
fn synth_gen_is_reproducible_and_counts_clips() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "a", &[]);
    gen(tmp.path(), "b", &["--threads", "1"]);
    let a = fs::read(tmp.path().join("a").join(MANIFEST_FILE)).unwrap();
    let b = fs::read(tmp.path().join("b").join(MANIFEST_FILE)).unwrap();
    assert_eq!(a, b);
    let pa = fs::read(tmp.path().join("a/scenes/0001/cam3/frame5.pfm")).unwrap();
    let pb = fs::read(tmp.path().join("b/scenes/0001/cam3/frame5.pfm")).unwrap();
    assert_eq!(pa, pb);

    ok(tmp.path(), &["synth", "gen", "--scenes", "3", "--duration", "2", "--resolution", "16", "--out", "c"]);
    let m = DatasetManifest::read(tmp.path().join("c").join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.clips.len(), 3 * 2);
}

#[test]
fn synth_gen_zero_scenes_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gauss4d(tmp.path(), &["synth", "gen", "--scenes", "0", "--out", "z"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let m = DatasetManifest::read(tmp.path().join("z").join(MANIFEST_FILE)).unwrap();
    assert!(m.clips.is_empty());
}

#[test]
fn header_lists_seed_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gauss4d(tmp.path(), &["--threads", "1", "synth", "gen", "--scenes", "1", "--seed", "42", "--resolution", "16", "--duration", "1", "--out", "h"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("# seed=42"));
    assert!(err.contains("# threads=1"));
    assert!(err.contains("# resolution=16"));
}

#[test]
fn threads_env_var_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gauss4d"))
        .current_dir(tmp.path())
        .args(["synth", "gen", "--scenes", "1", "--resolution", "16", "--duration", "1", "--out", "e"])
        .env("GAUSS4D_THREADS", "1")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("# threads=1"));
    assert_eq!(code(&gauss4d(tmp.path(), &["--threads", "0", "synth", "filter", "--data", "e"])), 2);
}

#[test]
fn filter_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "d", &["--templates", "0,11"]);
    let path = tmp.path().join("d").join(MANIFEST_FILE);
    let moving = DatasetManifest::read(&path).unwrap().clips.iter().filter(|c| c.motion_score > 0.0).count();
    ok(tmp.path(), &["synth", "filter", "--data", "d", "--threshold", "0"]);
    assert_eq!(DatasetManifest::read(&path).unwrap().kept_count(), moving);
    ok(tmp.path(), &["synth", "filter", "--data", "d", "--threshold", "1e9"]);
    assert_eq!(DatasetManifest::read(&path).unwrap().kept_count(), 0);

    let mut m = DatasetManifest::read(&path).unwrap();
    let scores = [0.1, 0.4];
    for (c, s) in m.clips.iter_mut().zip(scores) {
        c.motion_score = s;
    }
    m.write(&path).unwrap();
    let out = ok(tmp.path(), &["synth", "filter", "--data", "d", "--threshold", "0.25"]);
    assert!(out.contains("kept=1 total=2"));
    let m = DatasetManifest::read(&path).unwrap();
    assert_eq!(m.clips.iter().map(|c| c.kept).collect::<Vec<_>>(), vec![false, true]);
}

#[test]
fn render_of_empty_file_is_a_format_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("empty.g4ds"), b"").unwrap();
    let out = gauss4d(tmp.path(), &["render", "--in", "empty.g4ds", "--out", "v"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty.g4ds"));
    let out = gauss4d(tmp.path(), &["render", "--in", "missing.g4ds", "--out", "v"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn train_flag_errors() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "d", &[]);
    let out = gauss4d(tmp.path(), &["train", "base", "--data", "d", "--out", "t"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--init"));
    let out = gauss4d(tmp.path(), &["train", "interp", "--data", "d", "--out", "t"]);
    assert_eq!(code(&out), 2);
    let out = gauss4d(tmp.path(), &["train", "base", "--data", "d", "--out", "t", "--freeze-backbone", "--random-init"]);
    assert_eq!(code(&out), 2);
    let out = gauss4d(tmp.path(), &["train", "base", "--data", "d", "--out", "t", "--freeze-backbone", "--no-temporal", "--init", "x"]);
    assert_eq!(code(&out), 2);
    let out = gauss4d(tmp.path(), &["train", "base", "--data", "d", "--out", "t", "--random-init", "--set", "nonsense=1"]);
    assert_eq!(code(&out), 2);
    let out = gauss4d(tmp.path(), &["train", "base", "--data", "d", "--out", "t", "--init", "missing.g4ck"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn zero_steps_returns_init() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "d", &[]);
    ok(tmp.path(), &["train", "base", "--data", "d", "--out", "t", "--random-init", "--steps", "0", "--seed", "3"]);
    let ck = load_checkpoint(tmp.path().join("t/base4d.g4ck")).unwrap();
    let init = Model::new(&ck.config).unwrap().init_params(3);
    assert_eq!(ck.params, init);
    let cfg = fs::read_to_string(tmp.path().join("t/config.txt")).unwrap();
    assert!(cfg.contains("model.input_resolution=32"));
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "d", &[]);
    gen(d, "d24", &["--clip-fps", "24"]);
    ok(d, &["train", "pretrain3d", "--data", "d", "--out", "p", "--steps", "1"]);
    ok(d, &["train", "base", "--data", "d", "--out", "b", "--init", "p/pretrain3d.g4ck", "--steps", "1", "--set", "frames=4"]);
    ok(d, &["train", "interp", "--data", "d24", "--out", "i", "--init", "b/base4d.g4ck", "--steps", "1"]);

    let out = ok(d, &["render", "--in", "d/scenes/0000/gt.g4ds", "--resolution", "32", "--out", "v"]);
    assert!(out.contains("visible="));
    assert!(d.join("v/frame0.png").is_file());
    let out = ok(d, &["reconstruct", "--video", "v", "--gt", "d/scenes/0000/gt.g4ds", "--checkpoint", "b/base4d.g4ck", "--chunk", "8", "--out", "r.g4ds"]);
    assert!(out.contains("frames=24"));
    let out = ok(d, &["interpolate", "--in", "r.g4ds", "--checkpoint", "i/interp.g4ck", "--out", "r3.g4ds"]);
    assert!(out.contains(&format!("frames_out={}", 3 * 23 + 1)));
    let json = ok(d, &["eval", "--pred", "r.g4ds", "--gt", "d/scenes/0000/gt.g4ds", "--resolution", "32", "--out", "report.json"]);
    assert!(json.contains("mean_psnr"));
    assert!(d.join("report.json").is_file());

    // parallel and serial runs write identical bytes
    ok(d, &["--threads", "1", "reconstruct", "--video", "v", "--gt", "d/scenes/0000/gt.g4ds", "--checkpoint", "b/base4d.g4ck", "--chunk", "8", "--out", "r1.g4ds"]);
    assert_eq!(fs::read(d.join("r.g4ds")).unwrap(), fs::read(d.join("r1.g4ds")).unwrap());

    // a video exactly one chunk long takes one pass
    ok(d, &["render", "--in", "r3.g4ds", "--resolution", "32", "--out", "vfull"]);
    for t in 8..70 {
        fs::remove_file(d.join(format!("vfull/frame{t}.pfm"))).unwrap();
        fs::remove_file(d.join(format!("vfull/frame{t}.png"))).unwrap();
    }
    fs::write(d.join("vfull/video.txt"), "fps=8\ncamera=0 0 1.5 49.1\n").unwrap();
    let out = ok(d, &["reconstruct", "--video", "vfull", "--gt", "r3.g4ds", "--checkpoint", "b/base4d.g4ck", "--chunk", "8", "--out", "one.g4ds"]);
    assert!(out.contains("forward_passes=1"));

    let a = ok(d, &["align", "--gaussians", "d/scenes/0000/gt.g4ds", "--image", "v/frame0.pfm"]);
    assert!(a.starts_with("theta=0 "), "{a}");
}

#[test]
fn moving_camera_video_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "d", &[]);
    ok(d, &["render", "--in", "d/scenes/0000/gt.g4ds", "--resolution", "32", "--out", "v"]);
    let meta = fs::read_to_string(d.join("v/video.txt")).unwrap();
    let moved = meta.replacen("camera=0 0 1.5 49.1", "camera=15 0 1.5 49.1", 2).replacen("camera=15 0 1.5 49.1", "camera=0 0 1.5 49.1", 1);
    fs::write(d.join("v/video.txt"), moved).unwrap();
    fs::write(d.join("fake.g4ck"), b"G4CK").unwrap();
    let out = gauss4d(d, &["reconstruct", "--video", "v", "--gt", "d/scenes/0000/gt.g4ds", "--checkpoint", "fake.g4ck", "--out", "r.g4ds"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("moving-camera"));
}

#[test]
fn eval_rig_specs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "d", &[]);
    let json = ok(d, &["eval", "--pred", "d/scenes/0000/gt.g4ds", "--gt", "d/scenes/0000/gt.g4ds", "--rig", "ring:3", "--resolution", "16", "--curve", "c.csv"]);
    assert_eq!(json.matches("\"azimuth\"").count(), 3);
    assert!(d.join("c.csv").is_file());
    ok(d, &["eval", "--pred", "d/scenes/0000/gt.g4ds", "--gt", "d/scenes/0000/gt.g4ds", "--rig", "30:10,-45:0", "--resolution", "16"]);
    let out = gauss4d(d, &["eval", "--pred", "d/scenes/0000/gt.g4ds", "--gt", "d/scenes/0000/gt.g4ds", "--rig", "30"]);
    assert_eq!(code(&out), 2);
    let out = gauss4d(d, &["eval", "--pred", "d/scenes/0000/gt.g4ds", "--gt", "d/scenes/0000/gt.g4ds", "--gt-stride", "3"]);
    assert_eq!(code(&out), 3);
}
