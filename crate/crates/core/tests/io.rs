use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdpme_core::io::{render_table, snapshot_roundtrip, SnapshotFile};
use sdpme_core::{parse_config, run_simulation, Error, Field, Grid, ReactionTerm};

fn random_field(seed: u64) -> Field {
    let grid = Grid::rect((0.0, 2.0), (-1.0, 1.0), 64, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len()).map(|_| rng.gen::<f64>()).collect();
    Field::new(grid, values).unwrap()
}

#[test]
fn random_field_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let field = random_field(11);
    let back = snapshot_roundtrip(&field, dir.path().join("u.snap")).unwrap();
    assert_eq!(back.grid(), field.grid());
    assert!(back.values().iter().zip(field.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn damaged_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.snap");
    SnapshotFile::new("u", 0.5, random_field(3)).write(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    let cut = dir.path().join("cut.snap");
    std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(SnapshotFile::read(&cut), Err(Error::Format(_))));

    let mut bumped = bytes.clone();
    bumped[8..12].copy_from_slice(&2u32.to_le_bytes());
    let err = SnapshotFile::from_bytes(&bumped).unwrap_err();
    assert!(matches!(&err, Error::Format(m) if m.contains("version 2")), "{err}");

    let mut longer = bytes;
    longer.push(0);
    assert!(matches!(SnapshotFile::from_bytes(&longer), Err(Error::Format(_))));
}

const CONFIG: &str = r#"
seed = 5

[grid]
lo = [0.0]
hi = [1.0]
cells = [64]

[nonlinearity]
kind = "power_law"
m = 2.0

[initial]
kind = "random"
lo = 0.1
hi = 0.6

[solver]
dt = 0.01
t_end = 0.2
"#;

fn pipeline() -> (Vec<u8>, String) {
    let cfg = parse_config(CONFIG).unwrap();
    let u0 = cfg.initial_field().unwrap();
    let traj = run_simulation(&u0, &cfg.nonlinearity().unwrap(), &ReactionTerm::zero(), &cfg.solver_config().unwrap())
        .unwrap();
    let snap = SnapshotFile::new("u", traj.t_end(), traj.last().clone()).to_bytes();
    (snap, render_table(&traj))
}

#[test]
fn same_config_and_seed_give_identical_exports() {
    assert_eq!(pipeline(), pipeline());
}

#[test]
fn resolved_config_parses_back_to_itself() {
    let cfg = parse_config(CONFIG).unwrap();
    let echoed = cfg.to_toml();
    assert_eq!(parse_config(&echoed).unwrap(), cfg);
    assert_eq!(parse_config(&echoed).unwrap().to_toml(), echoed);
}
