//! Randomized invariants over the preprocessing and state layers.

mod common;

use common::*;
use proptest::prelude::*;
use pz_core::env::Observation;
use pz_core::{preprocess, SourceText};

proptest! {
    /// Preprocessing is idempotent and length-preserving whenever it
    /// succeeds at all.
    #[test]
    fn preprocess_idempotent_and_length_preserving(s in "[ -~\n]{0,300}") {
        let src = SourceText::new(s.clone());
        if let Ok(once) = preprocess(&src) {
            prop_assert_eq!(once.raw.len(), s.len());
            let twice = preprocess(&once).expect("second pass cannot fail");
            prop_assert_eq!(&twice.raw, &once.raw);
            prop_assert_eq!(&twice.line_index, &once.line_index);
        }
    }

    /// Unbalanced `(` is the only preprocess failure, and it reports a
    /// line inside the input.
    #[test]
    fn preprocess_errors_point_at_real_lines(s in "[a-z(\n]{1,120}") {
        let src = SourceText::new(s.clone());
        if let Err(d) = preprocess(&src) {
            let lines = s.lines().count().max(1);
            prop_assert!(d.line >= 1 && d.line <= lines);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Observation planes round-trip bit-for-bit through the flat
    /// export for random reachable states.
    #[test]
    fn observation_round_trip_from_random_walks(seed in 0u64..500) {
        let game = load_game("sokoban_basic.txt");
        let mut state = init(&game, 1);
        let mut x = seed;
        for _ in 0..12 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let action = match (x >> 33) % 4 {
                0 => pz_core::Action::Up,
                1 => pz_core::Action::Down,
                2 => pz_core::Action::Left,
                _ => pz_core::Action::Right,
            };
            let (next, _) = tick(&game, &state, action);
            state = next;
        }
        let obs = Observation::from_state(&state);
        let rebuilt = obs.to_state(&game);
        prop_assert_eq!(rebuilt.digest(), state.digest());
        prop_assert_eq!(Observation::from_state(&rebuilt).to_bytes(), obs.to_bytes());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Over random reachable states of condition-winnable games, a zero
    /// heuristic coincides exactly with a winning state.
    #[test]
    fn zero_distance_iff_win_on_random_states(seed in 0u64..400, steps in 1usize..25) {
        let game = load_game("sokoban_basic.txt");
        let cfg = pz_core::env::HeuristicConfig::default();
        let mut state = init(&game, 1);
        let mut x = seed.wrapping_mul(2654435769);
        for _ in 0..steps {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let action = match (x >> 33) % 4 {
                0 => pz_core::Action::Up,
                1 => pz_core::Action::Down,
                2 => pz_core::Action::Left,
                _ => pz_core::Action::Right,
            };
            let (next, _) = tick(&game, &state, action);
            state = next;
            let zero = pz_core::env::win_distance(&game, &state, &cfg) == 0.0;
            prop_assert_eq!(zero, pz_core::engine::check_win(&game, &state));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// The whole compile pipeline returns Ok or Err on arbitrary input,
    /// never panicking — garbage in, diagnostics out.
    #[test]
    fn compile_pipeline_never_panics(s in "[ -~\n]{0,400}") {
        let _ = pz_core::compile_source(&s);
    }

    /// Section-shaped garbage exercises the deeper parsers.
    #[test]
    fn sectioned_garbage_never_panics(
        objects in "[a-z#.| \n=0-9]{0,80}",
        rules in "[a-zA-Z>^<v.\\[\\]| \n+-]{0,80}",
        levels in "[a-zP#.\n ]{0,60}",
    ) {
        let src = format!("OBJECTS\n{objects}\nRULES\n{rules}\nLEVELS\n{levels}");
        let _ = pz_core::compile_source(&src);
    }
}
