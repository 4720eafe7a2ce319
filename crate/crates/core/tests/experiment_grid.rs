//! End-to-end runs of small experiment grids.

use ilshade::experiment::{
    run_experiment, trace_file_name, AlgorithmKind, AlgorithmSpec, ExperimentError, ExperimentPlan, TraceTable,
};

fn small_plan(output: &std::path::Path) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(
        vec![AlgorithmSpec::new(AlgorithmKind::IlshadeRsp)],
        vec!["sphere".into()],
        vec![5],
        vec![1, 2, 3],
    );
    plan.output = output.to_owned();
    plan.budget = Some(3000);
    plan.workers = Some(2);
    plan
}

#[test]
fn one_cell_writes_rows_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&small_plan(dir.path())).unwrap();
    assert_eq!(out.rows.len(), 3);
    assert_eq!(out.rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert!(out.rows.iter().all(|r| r.nfe_used <= 3000 && r.fev >= 0.0));
    assert_eq!(out.traces, vec![dir.path().join(trace_file_name("sphere", 5))]);

    let table = TraceTable::read(std::fs::File::open(&out.traces[0]).unwrap()).unwrap();
    assert_eq!(table.algorithms, vec!["ilshade-rsp".to_owned()]);
    assert_eq!(table.rows.len(), 100);
    assert_eq!(table.rows.last().unwrap().nfe, 3000);
    assert!(table.rows.windows(2).all(|w| w[1].spreads[0].median <= w[0].spreads[0].median));
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut plan = small_plan(a.path());
    plan.algorithms.push(AlgorithmSpec::new(AlgorithmKind::ClassicDe));
    plan.problems.push("shifted-rotated-ackley".into());
    plan.workers = Some(1);
    run_experiment(&plan).unwrap();
    plan.output = b.path().to_owned();
    plan.workers = Some(4);
    run_experiment(&plan).unwrap();
    for name in [
        "results.csv".to_owned(),
        trace_file_name("sphere", 5),
        trace_file_name("shifted-rotated-ackley", 5),
    ] {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name} differs");
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn unknown_problem_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = small_plan(&dir.path().join("out"));
    plan.problems.push("no-such-function".into());
    assert!(matches!(run_experiment(&plan), Err(ExperimentError::Problem { .. })));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn plan_file_problems_resolve_relative_to_the_plan() {
    let dir = tempfile::tempdir().unwrap();
    let data = "name shifted\nid sphere\ndim 2\nbias 7\n1 2\n1 0\n0 1\n";
    std::fs::write(dir.path().join("p.txt"), data).unwrap();
    let plan_text = format!(
        "[plan]\noutput = {:?}\nproblems = [\"file:p.txt\"]\nseeds = [4]\nbudget = 2000\n\n[[algorithm]]\nkind = \"lshade-rsp\"\n",
        dir.path().join("out").display().to_string()
    );
    std::fs::write(dir.path().join("plan.toml"), plan_text).unwrap();
    let plan = ExperimentPlan::load(dir.path().join("plan.toml")).unwrap();
    let out = run_experiment(&plan).unwrap();
    assert_eq!(out.rows.len(), 1);
    assert_eq!(out.rows[0].dimension, 2);
    assert!(out.rows[0].fev < 1e-6, "fev {}", out.rows[0].fev);
    assert!((out.rows[0].best_f - 7.0).abs() < 1e-6);
}
