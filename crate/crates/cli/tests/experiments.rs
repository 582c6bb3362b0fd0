use pilotcon_cli::{
    read_results, run_experiment, write_results, BAxis, CliError, ExperimentName, ExperimentSpec, ResultRow, CSV_HEADER,
};
use tempfile::tempdir;

fn quick(name: ExperimentName, trials: usize, dir: &std::path::Path) -> ExperimentSpec {
    let mut spec = ExperimentSpec::preset(name);
    spec.base.trials = trials;
    spec.output = dir.join(format!("{name}.csv"));
    spec
}

#[test]
fn zero_rows_give_header_only_file() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_results(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
    assert_eq!(
        CSV_HEADER.join(","),
        "experiment,method,a,b,M,K,L,tau,p_f_db,p_r_db,gamma,seed,trials,cell,user,rate,stderr,min_rate,closed_form,error"
    );
    assert!(read_results(&path).unwrap().is_empty());
}

#[test]
fn write_then_read_recovers_nine_digits() {
    let dir = tempdir().unwrap();
    let mut spec = quick(ExperimentName::Fig4Msweep, 200, dir.path());
    spec.m_values = vec![2, 4];
    let rows = run_experiment(&spec).unwrap();
    write_results(&rows, &spec.output).unwrap();
    let back = read_results(&spec.output).unwrap();
    assert_eq!(back.len(), rows.len());
    let close = |x: f64, y: f64| (x - y).abs() <= 5e-9 * x.abs().max(y.abs());
    for (r, s) in rows.iter().zip(&back) {
        assert_eq!((r.cell, r.user, r.antennas, r.seed, r.trials), (s.cell, s.user, s.antennas, s.seed, s.trials));
        assert_eq!(r.method, s.method);
        assert!(close(r.rate.unwrap(), s.rate.unwrap()));
        assert!(close(r.stderr.unwrap(), s.stderr.unwrap()));
        assert!(close(r.min_rate.unwrap(), s.min_rate.unwrap()));
        assert!(close(r.b, s.b));
        assert_eq!(s.error, None);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempdir().unwrap();
    let spec = quick(ExperimentName::Fig4Msweep, 300, dir.path());
    let first = dir.path().join("first.csv");
    write_results(&run_experiment(&spec).unwrap(), &first).unwrap();
    write_results(&run_experiment(&spec).unwrap(), &spec.output).unwrap();
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(&spec.output).unwrap());
}

#[test]
fn empty_axis_is_rejected_up_front() {
    let dir = tempdir().unwrap();
    let mut spec = quick(ExperimentName::Fig3Sweep, 100_000, dir.path());
    spec.a_values.clear();
    assert!(matches!(run_experiment(&spec), Err(CliError::InvalidSpec(_))));
    let mut spec = quick(ExperimentName::Fig3Sweep, 100_000, dir.path());
    spec.b_axis = BAxis::Values(vec![]);
    assert!(matches!(run_experiment(&spec), Err(CliError::InvalidSpec(_))));
    let mut spec = quick(ExperimentName::Fig4Msweep, 100_000, dir.path());
    spec.m_values.clear();
    assert!(matches!(run_experiment(&spec), Err(CliError::InvalidSpec(_))));
}

#[test]
fn fig4_covers_every_m_and_method() {
    let dir = tempdir().unwrap();
    let spec = quick(ExperimentName::Fig4Msweep, 2_000, dir.path());
    let rows = run_experiment(&spec).unwrap();
    // 4 M values x 2 methods x 8 users.
    assert_eq!(rows.len(), 4 * 2 * 8);
    for m in [2, 4, 8, 16] {
        let min = |method: &str| {
            let r: Vec<&ResultRow> = rows.iter().filter(|r| r.antennas == m && r.method == method).collect();
            assert_eq!(r.len(), 8);
            assert!(r.iter().all(|row| (row.b - 0.08).abs() < 1e-15));
            r[0].min_rate.unwrap()
        };
        assert!(min("MCMMSE") >= min("GPS"), "M={m}");
    }
}

#[test]
fn verify_rows_match_closed_form() {
    let dir = tempdir().unwrap();
    let mut spec = quick(ExperimentName::Theorem1Verify, 100_000, dir.path());
    spec.m_values = vec![8];
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let cf = r.closed_form.unwrap();
        assert!((r.rate.unwrap() - cf).abs() / cf < 0.02);
        assert_eq!(r.method, "ZF");
    }
}

#[test]
fn degenerate_points_become_error_rows() {
    let dir = tempdir().unwrap();
    let mut spec = quick(ExperimentName::Fig4Msweep, 100, dir.path());
    // a > 1 is outside the scenario's range; M = 1 < K violates the config.
    spec.a_values = vec![0.8, 1.5];
    spec.m_values = vec![1, 4];
    let rows = run_experiment(&spec).unwrap();
    let errors: Vec<&ResultRow> = rows.iter().filter(|r| r.error.is_some()).collect();
    // (0.8, M=1), (1.5, M=1), (1.5, M=4), each for 2 methods.
    assert_eq!(errors.len(), 6);
    assert!(errors.iter().all(|r| r.rate.is_none() && r.cell.is_none()));
    assert_eq!(rows.len() - errors.len(), 2 * 8);
    write_results(&rows, &spec.output).unwrap();
    let back = read_results(&spec.output).unwrap();
    let messages = |v: &[ResultRow]| v.iter().map(|r| r.error.clone()).collect::<Vec<_>>();
    assert_eq!(messages(&back), messages(&rows));
}

#[test]
fn asymptote_demo_approaches_limit() {
    let dir = tempdir().unwrap();
    let spec = quick(ExperimentName::AsymptoteDemo, 0, dir.path());
    let rows = run_experiment(&spec).unwrap();
    let at = |method: &str, m: usize| {
        rows.iter()
            .find(|r| r.method == method && r.antennas == m && r.cell == Some(0))
            .unwrap()
            .rate
            .unwrap()
    };
    let limit = at("asymptotic", 100_000);
    assert!((at("closed_form", 100_000) - limit).abs() / limit < 0.01);
    assert!(at("closed_form", 1) < at("closed_form", 1024));
    assert!(rows.iter().all(|r| r.trials == 0 && r.stderr.is_none()));
}
