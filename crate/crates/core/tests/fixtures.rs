//! Pins the JSON documents under `fixtures/`. Run with `UPDATE_FIXTURES=1`
//! to rewrite them.

use std::path::PathBuf;

use cpt_games::catalog;
use cpt_games::equilibrium::{MediatedGame, MediatedGameFile, RandomizedStrategyProfile};
use cpt_games::harness::{mu_star_mediator, RunConfig};

fn v<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).unwrap()
}

fn documents() -> Vec<(&'static str, serde_json::Value)> {
    let g = catalog::gamma_star(0.5).unwrap();
    let lottery = g.induced_lottery(0, &catalog::mu_odd(), 0).unwrap();
    let collision = MediatedGameFile::from_parts(
        &MediatedGame::identity(g.clone(), catalog::mu_o()).unwrap(),
        &RandomizedStrategyProfile::obedient(g.dims()),
        vec![],
    );
    let config = |name: &str| serde_json::to_value(RunConfig::for_scenario(name).unwrap()).unwrap();
    vec![
        ("gamma_star.json", v(&g)),
        (
            "gamma_star_3p.json",
            v(&catalog::gamma_star_3p(0.5).unwrap()),
        ),
        ("mu_o.json", v(&catalog::mu_o())),
        ("mu_e.json", v(&catalog::mu_e())),
        ("mu_star.json", v(&catalog::mu_star())),
        ("mu_star_3p.json", v(&catalog::mu_star_3p())),
        ("prefs_player1.json", v(g.preferences(0))),
        ("prefs_identity.json", v(g.preferences(1))),
        ("lottery_odd_row0.json", v(&lottery)),
        (
            "mu_star_mediated.json",
            v(&mu_star_mediator(0.5, 8).unwrap()),
        ),
        ("collision_mediated.json", v(&collision)),
        ("config_example1_2p.json", config("example1-2p")),
        ("config_example1_3p.json", config("example1-3p")),
        ("config_example2.json", config("example2")),
        ("config_random_2x2.json", config("random-2x2")),
        ("config_random.json", config("random")),
    ]
}

#[test]
fn fixtures_match_the_catalog() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let update = std::env::var_os("UPDATE_FIXTURES").is_some();
    for (name, value) in documents() {
        let path = dir.join(name);
        if update {
            std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap() + "\n").unwrap();
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        let on_disk: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(on_disk, value, "{name} is stale");
        if let Some(version) = on_disk.get("schema_version") {
            assert_eq!(version, 1, "{name}");
        }
    }
}
