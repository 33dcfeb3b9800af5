mod common;

use common::{battery, check_mobility_equivalence, load_arrivals};

#[test]
fn event_driven_mobility_replays_trajectories() {
    for b in battery(12, 0xa11ce) {
        let moves = check_mobility_equivalence(&b).unwrap_or_else(|e| panic!("seed {}: {e}", b.seed));
        assert!(moves > 0 || b.horizon.secs() < 600.0);
    }
}

#[test]
fn lazy_load_matches_eager_load() {
    for b in battery(12, 0xb0b) {
        let (eager, lazy) = load_arrivals(&b).unwrap();
        assert_eq!(eager.len(), lazy.len(), "seed {}", b.seed);
        assert_eq!(eager, lazy, "seed {}", b.seed);
    }
}
