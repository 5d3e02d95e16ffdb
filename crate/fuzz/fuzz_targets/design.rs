#![no_main]

use giftplace::graph::build_clique_graph;
use giftplace::metrics::{density_map, hpwl, overflow, GridConfig};
use giftplace::netlist::bookshelf::{placement_from_pl, Source};
use giftplace::netlist::BookshelfSources;
use giftplace::Design;
use libfuzzer_sys::fuzz_target;

// Input is `nodes \0 nets \0 pl [\0 scl]`.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let parts: Vec<&str> = s.split('\0').collect();
    if parts.len() < 3 {
        return;
    }
    let src = BookshelfSources {
        nodes: Source::new("f.nodes", parts[0]),
        nets: Source::new("f.nets", parts[1]),
        pl: Source::new("f.pl", parts[2]),
        scl: parts.get(3).map(|t| Source::new("f.scl", *t)),
    };
    let Ok(design) = Design::from_sources(&src) else {
        return;
    };
    if design.num_cells() > 10_000 {
        return;
    }
    let adj = build_clique_graph(&design, Some(64));
    assert!(adj.is_symmetric(0.0));
    if let Ok(g) = placement_from_pl(&design, parts[2], "f.pl") {
        let _ = hpwl(&design, &g);
        let grid = GridConfig {
            nx: 4,
            ny: 4,
            target_density: 1.0,
        };
        let o = overflow(&density_map(&design, &g, &grid));
        assert!(o.is_nan() || (0.0..=1.0 + 1e-9).contains(&o));
    }
});
