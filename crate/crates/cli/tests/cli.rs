use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qhr_cli::formats::{
    read_trajectory, trajectory_header, AreaRecord, OptionsRecord, PlanFile, PulseFile, PulseRecord,
    PulseStepRecord, RootRecord, ShapeRecord, StateFile, StateKind, StepRecord,
};
use tempfile::TempDir;

fn qhr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhr")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_json<T: serde::Serialize>(dir: &TempDir, name: &str, value: &T) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn polar(m: f64, a: f64) -> [f64; 2] {
    [m * (PI * a).cos(), m * (PI * a).sin()]
}

fn pure(data: Vec<[f64; 2]>) -> StateFile {
    StateFile { kind: StateKind::Pure, dimension: data.len(), data }
}

fn mixed(n: usize, data: Vec<[f64; 2]>) -> StateFile {
    StateFile { kind: StateKind::Mixed, dimension: n, data }
}

fn basis0() -> StateFile {
    pure(vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
}

fn uniform() -> StateFile {
    let s = 1.0 / 3f64.sqrt();
    pure(vec![[s, 0.0], [s, 0.0], [s, 0.0]])
}

fn two_level_superposition() -> StateFile {
    let s = 1.0 / 2f64.sqrt();
    pure(vec![[s, 0.0], [0.0, 0.0], [s, 0.0]])
}

fn three_level_superposition() -> StateFile {
    let s = 1.0 / 3f64.sqrt();
    pure(vec![[s, 0.0], polar(s, 1.0 / 3.0), polar(s, 1.0 / 7.0)])
}

fn diagonal(p: [f64; 3]) -> StateFile {
    let mut data = vec![[0.0, 0.0]; 9];
    for k in 0..3 {
        data[4 * k] = [p[k], 0.0];
    }
    mixed(3, data)
}

// printed to three decimals; trace 1.001
fn reference_source() -> StateFile {
    mixed(
        3,
        vec![
            [0.490, 0.0],
            polar(0.115, -0.789),
            polar(0.158, 0.107),
            polar(0.115, 0.789),
            [0.336, 0.0],
            polar(0.018, -0.675),
            polar(0.158, -0.107),
            polar(0.018, 0.675),
            [0.175, 0.0],
        ],
    )
}

fn reference_target() -> StateFile {
    mixed(
        3,
        vec![
            [0.298, 0.0],
            polar(0.022, 0.689),
            polar(0.033, 0.319),
            polar(0.022, -0.689),
            [0.180, 0.0],
            polar(0.177, 0.909),
            polar(0.033, -0.319),
            polar(0.177, -0.909),
            [0.523, 0.0],
        ],
    )
}

fn plan_to(dir: &TempDir, args: &[&str], name: &str) -> (Output, PathBuf) {
    let out_path = dir.path().join(name);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", path_str(&out_path)]);
    (qhr(&full), out_path)
}

fn modulus_phase(z: [f64; 2]) -> (f64, f64) {
    (z[0].hypot(z[1]), z[1].atan2(z[0]) / PI)
}

#[test]
fn generalized_pure_plan_matches_printed_vector() {
    let dir = TempDir::new().unwrap();
    let a = write_json(&dir, "a.json", &two_level_superposition());
    let b = write_json(&dir, "b.json", &three_level_superposition());
    let (out, plan_path) =
        plan_to(&dir, &["plan", "pure", "--source", path_str(&a), "--target", path_str(&b)], "plan.json");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plan: PlanFile = read_json(&plan_path);
    assert_eq!(plan.steps.len(), 1);
    let StepRecord::Reflection { kind, vector, phi } = &plan.steps[0] else { panic!("expected a reflection") };
    assert_eq!(kind, "generalized");
    assert!((phi / PI - 0.574).abs() < 1e-3, "phi/pi = {}", phi / PI);
    // printed: 0.194e^{0.213iπ}, 0.863e^{−0.454iπ}, 0.467e^{−0.083iπ}, up to a global phase
    let printed = [(0.194, 0.213), (0.863, -0.454), (0.467, -0.083)];
    let shift = modulus_phase(vector[1]).1 - printed[1].1;
    for (z, (m, a)) in vector.iter().zip(printed) {
        let (mm, aa) = modulus_phase(*z);
        let mut gap = (aa - shift - a).rem_euclid(2.0);
        if gap > 1.0 {
            gap -= 2.0;
        }
        assert!((mm - m).abs() < 1e-3 && gap.abs() < 1e-3, "component {z:?}");
    }
}

#[test]
fn equal_states_give_empty_plan() {
    let dir = TempDir::new().unwrap();
    let s = write_json(&dir, "s.json", &diagonal([0.6, 0.3, 0.1]));
    let (out, plan_path) =
        plan_to(&dir, &["plan", "mixed", "--source", path_str(&s), "--target", path_str(&s)], "plan.json");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plan: PlanFile = read_json(&plan_path);
    assert!(plan.steps.is_empty());

    let (out, pulse_path) = plan_to(&dir, &["compile", "--plan", path_str(&plan_path)], "pulses.json");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pulses: PulseFile = read_json(&pulse_path);
    assert!(pulses.steps.is_empty());
}

#[test]
fn spectrum_mismatch_exits_with_invariant_code() {
    let dir = TempDir::new().unwrap();
    let s = write_json(&dir, "s.json", &diagonal([0.6, 0.3, 0.1]));
    let t = write_json(&dir, "t.json", &diagonal([0.5, 0.3, 0.2]));
    let (out, plan_path) =
        plan_to(&dir, &["plan", "mixed", "--source", path_str(&s), "--target", path_str(&t)], "plan.json");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("synthesize"), "{}", stderr(&out));
    assert!(!plan_path.exists());
}

#[test]
fn malformed_input_exits_with_parse_code() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"kind\": \"pure\", \"dimension\": 3, \"data\": [[1, 0]] }").unwrap();
    let good = write_json(&dir, "good.json", &basis0());
    let out = qhr(&["plan", "pure", "--source", path_str(&bad), "--target", path_str(&good)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("expected 3 amplitudes"), "{}", stderr(&out));

    std::fs::write(&bad, "not json").unwrap();
    let out = qhr(&["verify", "--plan", path_str(&bad)]);
    assert_eq!(code(&out), 1);

    let nan = dir.path().join("nan.json");
    std::fs::write(&nan, "{ \"kind\": \"pure\", \"dimension\": 2, \"data\": [[1, 0], [1e999, 0]] }").unwrap();
    let out = qhr(&["plan", "pure", "--source", path_str(&nan), "--target", path_str(&good)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn spontaneous_synthesis_reports_probabilities() {
    let dir = TempDir::new().unwrap();
    let t = write_json(&dir, "t.json", &diagonal([0.6, 0.3, 0.1]));
    let (out, plan_path) = plan_to(
        &dir,
        &["plan", "synthesize", "--target", path_str(&t), "--route", "spontaneous"],
        "plan.json",
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plan: PlanFile = read_json(&plan_path);
    let probs: Vec<f64> = plan
        .steps
        .iter()
        .filter_map(|s| match s {
            StepRecord::ShortPulseDecay { probability, .. } => Some(*probability),
            _ => None,
        })
        .collect();
    assert_eq!(probs.len(), 2);
    assert!((probs[0] - 0.4).abs() < 1e-12 && (probs[1] - 0.375).abs() < 1e-12, "{probs:?}");
    assert!(plan.steps.iter().any(|s| matches!(s, StepRecord::LongDepletion { level: 2 })));

    let out = qhr(&["verify", "--plan", path_str(&plan_path)]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
}

#[test]
fn compile_reports_detunings() {
    let dir = TempDir::new().unwrap();
    let a = write_json(&dir, "a.json", &two_level_superposition());
    let b = write_json(&dir, "b.json", &three_level_superposition());
    let (_, plan_path) =
        plan_to(&dir, &["plan", "pure", "--source", path_str(&a), "--target", path_str(&b)], "plan.json");
    let (out, pulse_path) = plan_to(&dir, &["compile", "--plan", path_str(&plan_path)], "pulses.json");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pulses: PulseFile = read_json(&pulse_path);
    let PulseStepRecord::Pulses { pulses: sets, .. } = &pulses.steps[0] else { panic!("expected pulses") };
    assert!((sets[0].delta0 * sets[0].width - 0.791).abs() < 2e-3, "{}", sets[0].delta0);
    assert_eq!(sets[0].area_rule, AreaRecord::RosenZener);

    // a standard reflection, realized with l = 2
    let s = write_json(&dir, "s.json", &basis0());
    let u = write_json(&dir, "u.json", &uniform());
    let (_, plan_path) = plan_to(
        &dir,
        &["plan", "pure", "--method", "standard", "--source", path_str(&s), "--target", path_str(&u)],
        "std.json",
    );
    let (out, pulse_path) = plan_to(
        &dir,
        &["compile", "--plan", path_str(&plan_path), "--l", "2", "--root-index", "largest"],
        "pulses2.json",
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pulses: PulseFile = read_json(&pulse_path);
    let PulseStepRecord::Pulses { pulses: sets, .. } = &pulses.steps[0] else { panic!("expected pulses") };
    assert!((sets[0].delta0 - 1.732).abs() < 1e-3);
    assert!((sets[0].area - 4.0 * PI).abs() < 1e-12);
    assert_eq!(pulses.options.root, RootRecord::Largest);

    let out = qhr(&["compile", "--plan", path_str(&plan_path), "--root-index", "middle"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn uniform_superposition_simulation() {
    let dir = TempDir::new().unwrap();
    let s = write_json(&dir, "s.json", &basis0());
    let u = write_json(&dir, "u.json", &uniform());
    let (_, plan_path) = plan_to(
        &dir,
        &["plan", "pure", "--method", "standard", "--source", path_str(&s), "--target", path_str(&u)],
        "plan.json",
    );
    let (out, csv_path) = plan_to(&dir, &["simulate", "--plan", path_str(&plan_path)], "traj.csv");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("final D"));
    let (header, rows) = read_trajectory(std::fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(header, trajectory_header(3));
    let last = rows.last().unwrap();
    for k in 1..=3 {
        assert!((last[k] - 1.0 / 3.0).abs() < 1e-5, "P{} = {}", k - 1, last[k]);
    }
    assert!(*last.last().unwrap() < 1e-5);
    assert!((rows[0].last().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_drive_keeps_state_constant() {
    let dir = TempDir::new().unwrap();
    let initial = write_json(&dir, "rho.json", &reference_source());
    let record = PulseRecord {
        chi: vec![0.0; 3],
        beta: vec![0.0; 3],
        width: 1.0,
        area: 0.0,
        delta0: 0.0,
        shape: ShapeRecord::Sech,
        area_rule: AreaRecord::Free,
        index: 0,
    };
    let file = PulseFile {
        dimension: 3,
        options: OptionsRecord { l: None, k: 0, root: RootRecord::Smallest, shape: ShapeRecord::Sech },
        steps: vec![PulseStepRecord::Pulses { step: 0, pulses: vec![record] }],
    };
    let pulses = write_json(&dir, "zero.json", &file);
    let (out, csv_path) = plan_to(
        &dir,
        &[
            "simulate",
            "--pulses",
            path_str(&pulses),
            "--initial",
            path_str(&initial),
            "--gamma-decay",
            "0",
            "--samples",
            "21",
        ],
        "traj.csv",
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = read_trajectory(std::fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 21);
    for row in &rows {
        for (a, b) in row[1..row.len() - 1].iter().zip(&rows[0][1..rows[0].len() - 1]) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }
}

#[test]
fn dephasing_synthesis_reaches_reference_target() {
    let dir = TempDir::new().unwrap();
    let t = write_json(&dir, "t.json", &reference_target());
    let (out, plan_path) = plan_to(&dir, &["plan", "synthesize", "--target", path_str(&t)], "plan.json");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("rescaling"));
    let (out, csv_path) = plan_to(&dir, &["simulate", "--plan", path_str(&plan_path)], "traj.csv");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = read_trajectory(std::fs::File::open(&csv_path).unwrap()).unwrap();
    let d = *rows.last().unwrap().last().unwrap();
    assert!(d < 1e-2, "D = {d}");
    assert!(rows.windows(2).all(|w| w[1][0] >= w[0][0]));
}

#[test]
fn verify_accepts_valid_plan_and_rejects_wrong_source() {
    let dir = TempDir::new().unwrap();
    let a = write_json(&dir, "a.json", &two_level_superposition());
    let b = write_json(&dir, "b.json", &three_level_superposition());
    let (_, plan_path) =
        plan_to(&dir, &["plan", "pure", "--source", path_str(&a), "--target", path_str(&b)], "plan.json");
    let out = qhr(&["verify", "--plan", path_str(&plan_path)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("verify: PASS"));

    let wrong = write_json(&dir, "wrong.json", &basis0());
    let out = qhr(&["verify", "--plan", path_str(&plan_path), "--source", path_str(&wrong)]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("FAIL"));
}

#[test]
fn verify_printed_mixed_factorization() {
    // generalized factors M(v₁;φ₁)M(v₂;φ₂)M(v₃;φ₃), listed in application order
    let factors = [
        (vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], -0.128),
        (vec![[0.0, 0.0], polar(0.813, 0.469), polar(0.582, -0.261)], 0.969),
        (vec![polar(0.721, 0.659), polar(0.080, -0.209), polar(0.689, 0.270)], -0.841),
    ];
    let plan = PlanFile {
        dimension: 3,
        tolerance: 1e-9,
        source: reference_source(),
        target: reference_target(),
        steps: factors
            .into_iter()
            .map(|(vector, phi)| StepRecord::Reflection { kind: "generalized".into(), vector, phi: phi * PI })
            .collect(),
    };
    let dir = TempDir::new().unwrap();
    let p = write_json(&dir, "plan.json", &plan);
    let out = qhr(&["verify", "--plan", path_str(&p), "--tol", "2e-2"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let out = qhr(&["verify", "--plan", path_str(&p)]);
    assert_eq!(code(&out), 4);
}

#[test]
fn plan_file_round_trip_is_lossless() {
    let dir = TempDir::new().unwrap();
    let s = write_json(&dir, "s.json", &reference_source());
    let t = write_json(&dir, "t.json", &reference_target());
    let (out, synth_path) = plan_to(&dir, &["plan", "synthesize", "--target", path_str(&t)], "synth.json");
    assert_eq!(code(&out), 0);
    let (out, mixed_path) = plan_to(
        &dir,
        &["plan", "mixed", "--method", "standard", "--source", path_str(&s), "--target", path_str(&s)],
        "mixed.json",
    );
    assert_eq!(code(&out), 0);
    for path in [synth_path, mixed_path] {
        let text = std::fs::read_to_string(&path).unwrap();
        let file: PlanFile = serde_json::from_str(&text).unwrap();
        let plan = file.to_plan().unwrap();
        let again = PlanFile::from_plan(&plan);
        assert_eq!(again, file);
        assert_eq!(serde_json::to_string_pretty(&again).unwrap() + "\n", text);
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let t = write_json(&dir, "t.json", &diagonal([0.6, 0.3, 0.1]));
    let runs: Vec<Output> = (0..2)
        .map(|_| qhr(&["plan", "synthesize", "--target", path_str(&t), "--route", "spontaneous"]))
        .collect();
    assert_eq!(code(&runs[0]), 0);
    assert_eq!(runs[0].stdout, runs[1].stdout);

    let plan = write_json(&dir, "plan.json", &serde_json::from_slice::<PlanFile>(&runs[0].stdout).unwrap());
    let a = qhr(&["compile", "--plan", path_str(&plan)]);
    let b = qhr(&["compile", "--plan", path_str(&plan)]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_rejects_bad_configuration() {
    let dir = TempDir::new().unwrap();
    let s = write_json(&dir, "s.json", &basis0());
    let u = write_json(&dir, "u.json", &uniform());
    let (_, plan_path) = plan_to(
        &dir,
        &["plan", "pure", "--method", "standard", "--source", path_str(&s), "--target", path_str(&u)],
        "plan.json",
    );
    let out = qhr(&["simulate", "--plan", path_str(&plan_path), "--tspan", "5", "-5"]);
    assert_eq!(code(&out), 1);
    let out = qhr(&["simulate", "--plan", path_str(&plan_path), "--rtol", "0"]);
    assert_eq!(code(&out), 1);
}
