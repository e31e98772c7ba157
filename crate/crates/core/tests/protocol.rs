use std::time::Instant;

use subgraph_core::gopher::explore::explore;

#[test]
fn exhaustive_protocol_two_to_four_workers() {
    for (k, bound) in [(2, 4), (3, 3), (4, 2)] {
        let t = Instant::now();
        let r = explore(k, bound);
        eprintln!("k={k} bound={bound}: {} states, {} terminations in {:?}", r.states, r.terminations, t.elapsed());
        assert!(r.violations.is_empty(), "k={k}: {:?}", r.violations);
        assert!(r.terminations > 0 && r.bounded > 0);
    }
}
