mod common;

use stockgrid::pipeline::{
    cmd_report, cmd_shortfall, cmd_simulate, Manifest, Overrides, MANIFEST_FILE,
};
use stockgrid::retrofit::Scenario;
use stockgrid::ErrorKind;

fn overrides(dir: &std::path::Path) -> Overrides {
    Overrides {
        out_dir: Some(dir.to_path_buf()),
        seed: None,
    }
}

fn simulate_err(config: &std::path::Path, out: &std::path::Path) -> stockgrid::Error {
    match cmd_simulate(config, &overrides(out)) {
        Ok(_) => panic!("{} should not simulate", config.display()),
        Err(e) => e,
    }
}

fn read_all(dir: &std::path::Path, m: &Manifest) -> Vec<(String, Vec<u8>)> {
    m.files
        .keys()
        .map(|f| (f.clone(), std::fs::read(dir.join(f)).unwrap()))
        .collect()
}

#[test]
fn mini_run_is_reproducible() {
    let config = common::config("mini.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (out, ma) = cmd_simulate(&config, &overrides(a.path())).unwrap();
    assert_eq!(out.tables.len(), 1);
    assert_eq!(out.tables[0].scenario, Scenario::Baseline);

    let csvs: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("scenario_") && n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 1, "{csvs:?}");
    let text = std::fs::read_to_string(a.path().join(&csvs[0])).unwrap();
    assert_eq!(text.lines().count(), 8760 + 1);

    let (_, mb) = cmd_simulate(&config, &overrides(b.path())).unwrap();
    assert_eq!(ma.files, mb.files);
    assert_eq!(read_all(a.path(), &ma), read_all(b.path(), &mb));
    assert_eq!(
        std::fs::read(a.path().join(MANIFEST_FILE)).unwrap(),
        std::fs::read(b.path().join(MANIFEST_FILE)).unwrap()
    );
    assert!(ma.stale_files(a.path()).unwrap().is_empty());

    let (report, mr) = cmd_report(&config, &overrides(a.path())).unwrap();
    assert_eq!(report.scenarios, [Scenario::Baseline]);
    assert!(report.crossover.is_empty());
    assert_eq!(report.analysis_hours, 28 * 24);
    let scatter = std::fs::read_to_string(a.path().join("temperature_vs_demand.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 28 * 24 + 1);
    assert_eq!(
        scatter.lines().next().unwrap(),
        "timestamp,mean_temp_c,baseline_buildings_mw"
    );
    assert!(mr.files.contains_key(stockgrid::pipeline::REPORT_FILE));
    assert!(mr.files.len() > ma.files.len());
    let (_, ms) = cmd_shortfall(&config, &overrides(a.path())).unwrap();
    assert!(ms.stale_files(a.path()).unwrap().is_empty());

    std::fs::write(a.path().join(&csvs[0]), "tampered").unwrap();
    assert_eq!(ms.stale_files(a.path()).unwrap(), vec![csvs[0].clone()]);
}

#[test]
fn seed_override_changes_results() {
    let config = common::config("mini.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (x, _) = cmd_simulate(&config, &overrides(a.path())).unwrap();
    let (y, _) = cmd_simulate(
        &config,
        &Overrides {
            out_dir: Some(b.path().to_path_buf()),
            seed: Some(1),
        },
    )
    .unwrap();
    assert_ne!(x.summary, y.summary);
}

#[test]
fn bad_config_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(common::config("mini.json")).unwrap();
    let path = dir.path().join("bad.json");

    std::fs::write(
        &path,
        text.replace("\"schema_version\": 1", "\"schema_version\": 7"),
    )
    .unwrap();
    let err = simulate_err(&path, dir.path());
    assert_eq!(err.kind(), ErrorKind::Config, "{err}");

    std::fs::write(
        &path,
        text.replace("\"baseline\"", "\"heat_pumps_everywhere\""),
    )
    .unwrap();
    assert_eq!(simulate_err(&path, dir.path()).kind(), ErrorKind::Config);

    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(simulate_err(&path, dir.path()).kind(), ErrorKind::Config);
}

fn copy_tree(from: &std::path::Path, to: &std::path::Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[test]
fn missing_input_is_config_error() {
    // Relative paths resolve against the config's own directory, which holds
    // none of the referenced inputs.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mini.json");
    std::fs::copy(common::config("mini.json"), &path).unwrap();
    assert_eq!(
        simulate_err(&path, &dir.path().join("out")).kind(),
        ErrorKind::Config
    );
}

#[test]
fn malformed_input_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    copy_tree(&common::data_dir(), &data);
    let grid = data.join("grid_2021.csv");
    let text = std::fs::read_to_string(&grid).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[100].split(',').map(String::from).collect();
    fields[1] = "-5".into();
    lines[100] = fields.join(",");
    std::fs::write(&grid, lines.join("\n") + "\n").unwrap();
    let err = simulate_err(&data.join("configs/mini.json"), &dir.path().join("out"));
    assert_eq!(err.kind(), ErrorKind::Data, "{err}");
}

#[test]
fn report_without_simulation_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cmd_report(&common::config("mini.json"), &overrides(dir.path())).is_err());
}
