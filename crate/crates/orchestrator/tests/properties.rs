use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use hde_backend::ScriptedBackend;
use hde_core::{Phase, Speaker};
use hde_orchestrator::{load_index, run_full_pipeline, PerturbationId, RunConfig, ScheduledPerturbation, TeamConfig};
use hde_retrieval::RetrievalIndex;
use proptest::prelude::*;
use proptest::sample::subsequence;

const PHILOSOPHERS: [&str; 7] = ["kant", "mill", "bentham", "aristotle", "plato", "aquinas", "augustine"];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn index() -> Arc<RetrievalIndex> {
    static INDEX: OnceLock<Arc<RetrievalIndex>> = OnceLock::new();
    INDEX
        .get_or_init(|| Arc::new(load_index(&fixtures().join("corpora/manifest.toml")).unwrap()))
        .clone()
}

#[derive(Debug, Clone)]
struct Shape {
    teams: usize,
    per_team: usize,
    agents: Vec<&'static str>,
    length: usize,
    rounds: usize,
    injections: Vec<usize>,
    id_rag: bool,
    tom: bool,
}

fn shapes() -> impl Strategy<Value = Shape> {
    (1usize..=2, 1usize..=3, 1usize..=14, 0usize..=3, any::<bool>(), any::<bool>())
        .prop_flat_map(|(teams, per_team, length, rounds, id_rag, tom)| {
            let agents = subsequence(PHILOSOPHERS.to_vec(), teams * per_team).prop_shuffle();
            let injections = subsequence((1..length).collect::<Vec<_>>(), 0..length.clamp(1, 4));
            (agents, injections).prop_map(move |(agents, injections)| Shape {
                teams,
                per_team,
                agents,
                length,
                rounds,
                injections,
                id_rag,
                tom,
            })
        })
}

fn build(shape: &Shape) -> RunConfig {
    let mut c = RunConfig {
        identities_dir: Some(fixtures().join("identities")),
        weakness_dir: Some(fixtures().join("weakness")),
        corpus_manifest: Some(fixtures().join("corpora/manifest.toml")),
        ..RunConfig::default()
    };
    c.teams = shape
        .agents
        .chunks(shape.per_team)
        .zip(["A", "B"])
        .map(|(agents, id)| TeamConfig::new(id, agents, ""))
        .collect();
    c.debate_length = shape.length;
    c.deliberation_rounds = shape.rounds;
    c.id_rag_enabled = Some(shape.id_rag);
    c.tom_enabled = Some(shape.tom);
    let ids = PerturbationId::NAMED;
    c.perturbations = shape
        .injections
        .iter()
        .enumerate()
        .map(|(i, &t)| ScheduledPerturbation::named(t, ids[i % 3]))
        .collect();
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn orchestration_laws(shape in shapes()) {
        let config = build(&shape);
        let backend = ScriptedBackend::from_responses((0..200).map(|i| format!("line {i}")));
        let out = run_full_pipeline(&config, &backend, Some(index()), None).unwrap();
        let t = &out.state.transcript;
        prop_assert_eq!(out.state.phase, Phase::Done);

        // phase monotonicity
        prop_assert!(t.windows(2).all(|w| w[0].phase <= w[1].phase));

        let agents = shape.teams * shape.per_team;
        prop_assert_eq!(t.iter().filter(|x| x.phase == Phase::Deliberation).count(), agents * shape.rounds);
        prop_assert_eq!(t.iter().filter(|x| x.phase == Phase::Interrogation).count(), 2 * agents);

        // turn-count law
        let debate: Vec<_> = t.iter().filter(|x| x.phase == Phase::Debate).collect();
        let speakers: Vec<_> = debate.iter().filter(|x| x.is_debate_speaker_turn()).collect();
        prop_assert_eq!(speakers.len(), shape.length);
        prop_assert_eq!(debate.len(), shape.length + shape.injections.len());

        // alternation law
        if shape.teams == 2 {
            prop_assert!(speakers.windows(2).all(|w| w[0].team_id != w[1].team_id));
        }
        for team in &config.teams {
            let order: Vec<&str> = speakers
                .iter()
                .filter(|s| s.team_id.as_deref() == Some(team.team_id.as_str()))
                .map(|s| s.speaker.agent_id().unwrap())
                .collect();
            for (i, a) in order.iter().enumerate() {
                prop_assert_eq!(*a, team.agent_ids[i % team.agent_ids.len()].as_str());
            }
        }

        // perturbation placement
        for &turn in &shape.injections {
            let pos = debate
                .iter()
                .position(|x| x.speaker == Speaker::Moderator && x.debate_turn_index == Some(turn))
                .unwrap();
            prop_assert!(pos >= 1);
            prop_assert_eq!(debate[pos - 1].debate_turn_index, Some(turn));
            prop_assert!(debate[pos - 1].is_debate_speaker_turn());
            let after = debate[pos + 1..].iter().filter(|x| x.is_debate_speaker_turn()).count();
            prop_assert_eq!(after, shape.length - turn);
        }
    }
}
