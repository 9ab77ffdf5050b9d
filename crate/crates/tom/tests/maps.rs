use std::path::{Path, PathBuf};

use hde_core::School;
use hde_tom::{select_hints, WeaknessMap, DEFAULT_MAX_HINTS};
use proptest::prelude::*;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

const OWNERS: [(&str, School); 7] = [
    ("kant", School::Deontology),
    ("mill", School::Utilitarianism),
    ("bentham", School::Utilitarianism),
    ("aristotle", School::VirtueAncient),
    ("plato", School::VirtueAncient),
    ("aquinas", School::NaturalLaw),
    ("augustine", School::VirtueChristian),
];

fn load(agent: &str, school: School) -> WeaknessMap {
    WeaknessMap::load(&root().join(format!("fixtures/weakness/{agent}.json")), school).unwrap()
}

#[test]
fn every_fixture_map_validates() {
    for (agent, school) in OWNERS {
        let map = load(agent, school);
        assert_eq!(map.owner_agent_id(), agent);
        assert!(!map.entries().is_empty());
        assert!(map.entries().iter().all(|e| e.target_school != school));
    }
}

#[test]
fn kant_answers_mill() {
    let map = load("kant", School::Deontology);
    let turn = "The greatest happiness of the greater good requires weighing consequences.";
    let hints = select_hints(&map, turn, School::Utilitarianism, DEFAULT_MAX_HINTS);
    assert_eq!(hints.len(), 2);
    // three aggregation triggers beat one consequence trigger
    assert!(hints[0].weakness_text.starts_with("Aggregation"));
    assert!(hints.iter().all(|h| h.target_school == School::Utilitarianism));
}

#[test]
fn tom_does_not_depend_on_identity() {
    let manifest: toml::Table = toml::from_str(&std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("Cargo.toml")).unwrap()).unwrap();
    for section in ["dependencies", "dev-dependencies", "build-dependencies"] {
        if let Some(deps) = manifest.get(section).and_then(|d| d.as_table()) {
            assert!(!deps.contains_key("hde-identity"), "{section} lists hde-identity");
        }
    }
}

proptest! {
    #[test]
    fn selection_is_pure_and_on_target(
        words in proptest::collection::vec(
            prop_oneof![
                Just("duty"), Just("utility"), Just("greatest happiness"), Just("virtue"), Just("grace"),
                Just("double effect"), Just("sacrifice"), Just("the"), Just("lever"), Just("character"),
            ],
            1..12,
        ),
        owner in 0usize..7,
        target in 0usize..5,
        max in 0usize..4,
    ) {
        let (agent, school) = OWNERS[owner];
        let map = load(agent, school);
        let opponent = School::DOCTRINAL[target];
        let turn = words.join(" ");
        let a = select_hints(&map, &turn, opponent, max);
        let b = select_hints(&map, &turn, opponent, max);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.len() <= max);
        prop_assert!(a.iter().all(|e| e.target_school == opponent));
        if opponent == school {
            prop_assert!(a.is_empty());
        }
    }
}
