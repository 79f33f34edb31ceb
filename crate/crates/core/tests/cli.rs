//! End-to-end tests of the `vesseg` binary: exit codes, printed
//! output, file products, and agreement with the library API.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use vesseg::phantom::{PhantomSpec, TubePath, TubeSpec};
use vesseg::pipeline::{segment, PipelineConfig};
use vesseg::volume::{read_nifti, write_mask};

fn vesseg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vesseg"))
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("binary should spawn");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        stdout_of(&out),
        stderr_of(&out)
    );
    stdout_of(&out)
}

fn run_err(cmd: &mut Command, expected_code: i32) -> String {
    let out = cmd.output().expect("binary should spawn");
    assert_eq!(
        out.status.code(),
        Some(expected_code),
        "stdout: {}\nstderr: {}",
        stdout_of(&out),
        stderr_of(&out)
    );
    stderr_of(&out)
}

/// A small, fast phantom: one straight 1.0 mm tube plus a 0.7 mm stub
/// whose ~5 mm³ component the default 10 mm³ filter must remove.
fn small_spec() -> PhantomSpec {
    let seg = |start: [f64; 3], end: [f64; 3], radius_mm: f64| TubeSpec {
        path: TubePath::Segment { start, end },
        radius_mm,
        contrast: 1.0,
    };
    PhantomSpec {
        dims: [48, 48, 48],
        spacing: [0.47, 0.47, 0.8],
        tubes: vec![
            seg([11.0, 11.0, 6.0], [11.0, 11.0, 30.0], 1.0),
            seg([17.0, 17.0, 15.0], [17.0, 17.0, 17.5], 0.7),
        ],
        background: 0.1,
        noise_sigma: 0.1,
        rng_seed: 21,
    }
}

fn write_spec(spec: &PhantomSpec, path: &Path) {
    std::fs::write(path, serde_json::to_string_pretty(spec).unwrap()).unwrap();
}

/// Generate the small phantom through the CLI; returns the volume and
/// ground-truth paths.
fn generate_small_phantom(dir: &Path) -> (PathBuf, PathBuf) {
    let spec_path = dir.join("spec.json");
    write_spec(&small_spec(), &spec_path);
    let prefix = dir.join("ph");
    run_ok(
        vesseg()
            .arg("phantom")
            .arg("--spec")
            .arg(&spec_path)
            .arg("--out-prefix")
            .arg(&prefix),
    );
    (dir.join("ph_volume.nii.gz"), dir.join("ph_gt.nii.gz"))
}

fn read_bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

fn dice_from_report(path: &Path) -> f64 {
    let text = std::fs::read_to_string(path).unwrap();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("dice = ") {
            return rest.trim().parse().unwrap();
        }
    }
    panic!("no dice line in {}", path.display());
}

#[test]
fn usage_errors_exit_two_with_usage_text() {
    // Missing required arguments is a usage error reported by the
    // argument parser itself.
    let err = run_err(vesseg().arg("segment"), 2);
    assert!(err.contains("Usage"), "no usage text in: {err}");

    let tmp = TempDir::new().unwrap();
    let nii = tmp.path().join("in.nii");
    std::fs::write(
        &nii,
        common::build_nifti_f32([3, 3, 3], [0.47, 0.47, 0.8], &[0.0; 27]),
    )
    .unwrap();

    // A non-positive scale is rejected after parsing, with the same
    // usage exit code.
    let err = run_err(
        vesseg()
            .arg("enhance")
            .arg(&nii)
            .arg("-o")
            .arg(tmp.path().join("map.nii.gz"))
            .arg("--sigma")
            .arg("0"),
        2,
    );
    assert!(err.contains("vesseg:"), "no error prefix in: {err}");

    // Parameter validation failures: impossible neighborhood count and
    // inverted hysteresis fractions.
    run_err(
        vesseg()
            .arg("segment")
            .arg(&nii)
            .arg("-o")
            .arg(tmp.path().join("m.nii.gz"))
            .arg("--connectivity")
            .arg("7"),
        2,
    );
    run_err(
        vesseg()
            .arg("segment")
            .arg(&nii)
            .arg("-o")
            .arg(tmp.path().join("m.nii.gz"))
            .arg("--frac-low")
            .arg("0.8,0.6"),
        2,
    );

    // --threads 0 cannot name a pool size.
    run_err(
        vesseg()
            .arg("--threads")
            .arg("0")
            .arg("info")
            .arg(&nii),
        2,
    );
}

#[test]
fn runtime_failures_exit_one() {
    let tmp = TempDir::new().unwrap();

    // Input file that does not exist.
    run_err(
        vesseg()
            .arg("segment")
            .arg(tmp.path().join("missing.nii.gz"))
            .arg("-o")
            .arg(tmp.path().join("out.nii.gz")),
        1,
    );

    // Input that is not a NIfTI file.
    let garbage = tmp.path().join("garbage.nii");
    std::fs::write(&garbage, b"this is not a volume, not even close....").unwrap();
    let err = run_err(vesseg().arg("info").arg(&garbage), 1);
    assert!(err.contains("vesseg:"), "no error prefix in: {err}");

    // Truncated gzip container.
    let truncated = tmp.path().join("short.nii.gz");
    std::fs::write(&truncated, [0x1f, 0x8b, 0x08, 0x00, 0x00]).unwrap();
    run_err(vesseg().arg("info").arg(&truncated), 1);

    // Output path blocked by a regular file acting as a directory.
    let (volume, _gt) = generate_small_phantom(tmp.path());
    let blocker = tmp.path().join("block.txt");
    std::fs::write(&blocker, "in the way").unwrap();
    run_err(
        vesseg()
            .arg("segment")
            .arg(&volume)
            .arg("-o")
            .arg(blocker.join("mask.nii.gz")),
        1,
    );

    // Masks on different grids cannot be scored against each other.
    let small = tmp.path().join("small.nii");
    let big = tmp.path().join("big.nii");
    std::fs::write(
        &small,
        common::build_nifti_f32([2, 2, 2], [1.0, 1.0, 1.0], &[1.0; 8]),
    )
    .unwrap();
    std::fs::write(
        &big,
        common::build_nifti_f32([3, 3, 3], [1.0, 1.0, 1.0], &[1.0; 27]),
    )
    .unwrap();
    let err = run_err(vesseg().arg("eval").arg(&small).arg(&big), 1);
    assert!(err.contains("vesseg:"), "no error prefix in: {err}");
}

#[test]
fn info_reports_geometry_and_intensity_stats() {
    let tmp = TempDir::new().unwrap();
    let nii = tmp.path().join("tiny.nii");
    let values = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    std::fs::write(
        &nii,
        common::build_nifti_f32([2, 2, 2], [0.47, 0.47, 0.8], &values),
    )
    .unwrap();

    let out = run_ok(vesseg().arg("info").arg(&nii));
    assert!(out.contains("dims = 2 x 2 x 2"), "{out}");
    assert!(out.contains("spacing_mm = 0.47 x 0.47 x 0.8"), "{out}");
    assert!(out.contains("datatype = 16 (float32)"), "{out}");
    assert!(out.contains("intensity_min = 0.000000"), "{out}");
    assert!(out.contains("intensity_max = 7.000000"), "{out}");
    assert!(out.contains("intensity_mean = 3.500000"), "{out}");
    assert!(out.contains("positive_voxels = 7"), "{out}");
    // Positives are 1..7; the 50th percentile is the 4th of 7 ranks.
    assert!(out.contains("positive_p50 = 4.000000"), "{out}");
    assert!(out.contains("positive_p99.9 = 7.000000"), "{out}");
}

#[test]
fn phantom_files_are_seed_deterministic() {
    let tmp = TempDir::new().unwrap();
    let spec_path = tmp.path().join("spec.json");
    write_spec(&small_spec(), &spec_path);

    let mut volumes = Vec::new();
    let mut truths = Vec::new();
    for run in ["a", "b"] {
        let prefix = tmp.path().join(run).join("ph");
        let out = run_ok(
            vesseg()
                .arg("phantom")
                .arg("--spec")
                .arg(&spec_path)
                .arg("--out-prefix")
                .arg(&prefix),
        );
        assert!(out.contains("dims = 48 x 48 x 48"), "{out}");
        assert!(out.contains("noise_stream = chacha8(seed=21)"), "{out}");
        volumes.push(read_bytes(&tmp.path().join(run).join("ph_volume.nii.gz")));
        truths.push(read_bytes(&tmp.path().join(run).join("ph_gt.nii.gz")));
        assert!(tmp.path().join(run).join("ph_gt_tube1.nii.gz").exists());
        assert!(tmp.path().join(run).join("ph_gt_tube2.nii.gz").exists());
    }
    assert_eq!(volumes[0], volumes[1], "same seed must give identical bytes");
    assert_eq!(truths[0], truths[1]);

    // A different seed changes the noise but not the geometry, so the
    // volume differs while the ground truth stays identical.
    let prefix = tmp.path().join("c").join("ph");
    let emitted = tmp.path().join("effective_spec.json");
    let out = run_ok(
        vesseg()
            .arg("phantom")
            .arg("--spec")
            .arg(&spec_path)
            .arg("--seed")
            .arg("22")
            .arg("--emit-spec")
            .arg(&emitted)
            .arg("--out-prefix")
            .arg(&prefix),
    );
    assert!(out.contains("noise_stream = chacha8(seed=22)"), "{out}");
    let volume_c = read_bytes(&tmp.path().join("c").join("ph_volume.nii.gz"));
    let gt_c = read_bytes(&tmp.path().join("c").join("ph_gt.nii.gz"));
    assert_ne!(volume_c, volumes[0]);
    assert_eq!(gt_c, truths[0]);

    // The emitted spec records the seed override and loads back.
    let back: PhantomSpec =
        serde_json::from_str(&std::fs::read_to_string(&emitted).unwrap()).unwrap();
    assert_eq!(back.rng_seed, 22);
    assert_eq!(back.dims, [48, 48, 48]);
}

#[test]
fn ablate_writes_a_mask_and_report_per_variant() {
    let tmp = TempDir::new().unwrap();
    let (volume, gt) = generate_small_phantom(tmp.path());
    let variants = [
        "full",
        "no_sigma_low",
        "no_sigma_high",
        "no_hysteresis",
        "no_components",
    ];

    // Without ground truth: masks only.
    let bare_dir = tmp.path().join("bare");
    run_ok(
        vesseg()
            .arg("ablate")
            .arg(&volume)
            .arg("--out-dir")
            .arg(&bare_dir),
    );
    for v in variants {
        assert!(bare_dir.join(format!("{v}.nii.gz")).exists(), "missing {v}");
        assert!(!bare_dir.join(format!("{v}_report.txt")).exists());
    }

    // With ground truth: a report next to each mask.
    let scored_dir = tmp.path().join("scored");
    let out = run_ok(
        vesseg()
            .arg("ablate")
            .arg(&volume)
            .arg("--out-dir")
            .arg(&scored_dir)
            .arg("--ground-truth")
            .arg(&gt),
    );
    assert!(out.contains("full: dice = "), "{out}");
    let mut dice = std::collections::HashMap::new();
    for v in variants {
        let mask_path = scored_dir.join(format!("{v}.nii.gz"));
        assert!(mask_path.exists(), "missing {v}");
        // Same input, same variant: bytes match the unscored run.
        assert_eq!(
            read_bytes(&mask_path),
            read_bytes(&bare_dir.join(format!("{v}.nii.gz"))),
            "{v} mask differs between runs"
        );
        let d = dice_from_report(&scored_dir.join(format!("{v}_report.txt")));
        assert!(d > 0.0 && d <= 1.0, "{v} dice {d}");
        dice.insert(v, d);
    }
    // On a 1.0 mm tube the thin scale alone undersegments badly.
    assert!(dice["full"] > dice["no_sigma_high"], "{dice:?}");
    // Skipping the volume filter keeps strictly more voxels (here the
    // sub-10 mm³ stub component that full removes).
    let count = |path: &Path| {
        read_nifti(path)
            .unwrap()
            .data()
            .iter()
            .filter(|v| **v != 0.0)
            .count()
    };
    assert!(
        count(&bare_dir.join("no_components.nii.gz")) > count(&bare_dir.join("full.nii.gz")),
        "filter removed nothing"
    );

    // Turning the volume filter off via the threshold reproduces the
    // no_components variant exactly.
    let unfiltered = tmp.path().join("unfiltered.nii.gz");
    run_ok(
        vesseg()
            .arg("segment")
            .arg(&volume)
            .arg("-o")
            .arg(&unfiltered)
            .arg("--min-component-mm3")
            .arg("0"),
    );
    assert_eq!(
        read_bytes(&unfiltered),
        read_bytes(&bare_dir.join("no_components.nii.gz"))
    );
}

#[test]
fn segment_cli_matches_the_library_and_round_trips() {
    let tmp = TempDir::new().unwrap();
    let (volume, gt) = generate_small_phantom(tmp.path());

    let mask_path = tmp.path().join("mask.nii.gz");
    let inter_dir = tmp.path().join("inter");
    let out = run_ok(
        vesseg()
            .arg("segment")
            .arg(&volume)
            .arg("-o")
            .arg(&mask_path)
            .arg("--save-intermediates")
            .arg(&inter_dir)
            .arg("--ground-truth")
            .arg(&gt),
    );
    assert!(out.contains("dims = 48 x 48 x 48"), "{out}");
    assert!(out.contains("spacing_mm = 0.47 x 0.47 x 0.8"), "{out}");
    assert!(out.contains("scale_1_mm = 0.47"), "{out}");
    assert!(out.contains("scale_2_mm = 0.94"), "{out}");
    assert!(out.contains("components_after_filter = "), "{out}");
    assert!(out.contains("dice = "), "{out}");
    for name in [
        "vesselness_scale_1.nii.gz",
        "mask_scale_1.nii.gz",
        "vesselness_scale_2.nii.gz",
        "mask_scale_2.nii.gz",
        "union.nii.gz",
    ] {
        assert!(inter_dir.join(name).exists(), "missing intermediate {name}");
    }

    // The same input through the library API gives a byte-identical
    // mask file.
    let vol = read_nifti(&volume).unwrap();
    let lib_mask = segment(&vol, &PipelineConfig::default()).unwrap();
    let lib_path = tmp.path().join("lib_mask.nii.gz");
    write_mask(&lib_path, &lib_mask).unwrap();
    assert_eq!(read_bytes(&mask_path), read_bytes(&lib_path));

    // The written mask reloads on the input grid holding only 0/1.
    let reloaded = read_nifti(&mask_path).unwrap();
    assert_eq!(reloaded.dims(), vol.dims());
    assert_eq!(reloaded.spacing(), vol.spacing());
    assert!(reloaded.data().iter().all(|v| *v == 0.0 || *v == 1.0));
    assert!(reloaded.data().iter().any(|v| *v == 1.0));

    // Scoring the truth against itself is a perfect overlap, and --out
    // mirrors stdout into a file.
    let report_path = tmp.path().join("self.txt");
    let out = run_ok(
        vesseg()
            .arg("eval")
            .arg(&gt)
            .arg(&gt)
            .arg("--out")
            .arg(&report_path),
    );
    assert!(out.contains("dice = 1.000000"), "{out}");
    assert_eq!(std::fs::read_to_string(&report_path).unwrap(), out);

    // Enhance writes a map on the same grid and reports its scale.
    let map_path = tmp.path().join("map.nii.gz");
    let out = run_ok(
        vesseg()
            .arg("enhance")
            .arg(&volume)
            .arg("-o")
            .arg(&map_path)
            .arg("--sigma")
            .arg("0.47"),
    );
    assert!(out.contains("sigma_mm = 0.47"), "{out}");
    assert!(out.contains("score_max = "), "{out}");
    let map = read_nifti(&map_path).unwrap();
    assert_eq!(map.dims(), vol.dims());
}

#[test]
fn config_precedence_is_defaults_then_file_then_flags() {
    let tmp = TempDir::new().unwrap();
    let (volume, _gt) = generate_small_phantom(tmp.path());
    let segment_to = |name: &str, extra: &dyn Fn(&mut Command)| -> Vec<u8> {
        let path = tmp.path().join(name);
        let mut cmd = vesseg();
        cmd.arg("segment").arg(&volume).arg("-o").arg(&path);
        extra(&mut cmd);
        run_ok(&mut cmd);
        read_bytes(&path)
    };

    let defaults = segment_to("default.nii.gz", &|_| {});

    // A config file relaxing the component filter changes the mask:
    // the stub survives.
    let cfg_path = tmp.path().join("relaxed.cfg");
    std::fs::write(
        &cfg_path,
        "# keep every component\nmin_component_mm3 = 0\n",
    )
    .unwrap();
    let from_file = segment_to("file.nii.gz", &|cmd| {
        cmd.arg("--config").arg(&cfg_path);
    });
    assert_ne!(from_file, defaults, "the stub should survive a 0 filter");

    // The same file through the environment variable behaves the same.
    let from_env = segment_to("env.nii.gz", &|cmd| {
        cmd.env("VESSEG_CONFIG", &cfg_path);
    });
    assert_eq!(from_env, from_file);

    // An explicit flag overrides the file, restoring the default.
    let flag_wins = segment_to("flag.nii.gz", &|cmd| {
        cmd.env("VESSEG_CONFIG", &cfg_path)
            .arg("--min-component-mm3")
            .arg("10");
    });
    assert_eq!(flag_wins, defaults);

    // Unknown keys are usage errors, not silent defaults.
    let bad_cfg = tmp.path().join("typo.cfg");
    std::fs::write(&bad_cfg, "min_componet_mm3 = 0\n").unwrap();
    let err = run_err(
        vesseg()
            .arg("segment")
            .arg(&volume)
            .arg("-o")
            .arg(tmp.path().join("never.nii.gz"))
            .arg("--config")
            .arg(&bad_cfg),
        2,
    );
    assert!(err.contains("unknown config key"), "{err}");

    // A config path that does not exist is an I/O failure.
    run_err(
        vesseg()
            .arg("segment")
            .arg(&volume)
            .arg("-o")
            .arg(tmp.path().join("never.nii.gz"))
            .arg("--config")
            .arg(tmp.path().join("absent.cfg")),
        1,
    );
}

#[test]
fn help_lists_the_default_parameters() {
    let out = run_ok(vesseg().arg("segment").arg("--help"));
    for token in ["0.47", "0.94", "0.57,0.67", "0.39,0.49", "99.9", "26"] {
        assert!(out.contains(token), "missing default {token} in: {out}");
    }
    assert!(out.contains("[default: 10]"), "{out}");
    assert!(out.contains("--min-component-mm3"), "{out}");
    assert!(out.contains("VESSEG_CONFIG"), "{out}");
}
