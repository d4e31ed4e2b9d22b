//! The engine's LSTM and FFN forward passes against the scalar reference
//! oracle in `tests/support`, on hand-set tiny weight sets, plus frozen
//! expected values computed from the same recurrences before the engine
//! existed.

mod support;

use flowdisagg_core::neuralnet::{Activation, FfnParams, LstmParams, Matrix};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// The combined-gate engine parameters equivalent to `support::tiny_lstm`:
/// row blocks ordered input, forget, cell, output.
fn engine_tiny_lstm() -> LstmParams {
    let mut p = LstmParams::zeros(1, 2);
    p.w_input = Matrix::from_rows(vec![
        vec![0.1],
        vec![-0.2],
        vec![0.2],
        vec![0.1],
        vec![0.4],
        vec![-0.3],
        vec![-0.1],
        vec![0.3],
    ]);
    p.w_hidden = Matrix::from_rows(vec![
        vec![0.3, -0.1],
        vec![0.2, 0.4],
        vec![-0.3, 0.2],
        vec![0.1, -0.2],
        vec![0.1, 0.2],
        vec![-0.2, 0.1],
        vec![0.2, -0.4],
        vec![0.3, 0.1],
    ]);
    p.bias = vec![0.05, -0.05, 0.1, 0.0, 0.0, 0.2, -0.1, 0.05];
    p
}

fn engine_tiny_ffn() -> FfnParams {
    let mut p = FfnParams::zeros(vec![2, 3, 1], Activation::Tanh);
    p.layers[0].weights = Matrix::from_rows(vec![vec![0.2, -0.1], vec![0.4, 0.3], vec![-0.2, 0.5]]);
    p.layers[0].bias = vec![0.1, -0.1, 0.0];
    p.layers[1].weights = Matrix::from_rows(vec![vec![0.5, -0.3, 0.2]]);
    p.layers[1].bias = vec![0.25];
    p
}

#[test]
fn lstm_single_step_matches_oracle_and_frozen_values() {
    let engine = engine_tiny_lstm();
    let oracle = support::tiny_lstm();

    let (h_engine, _) = engine.forward(&[vec![0.5]]).unwrap();
    let (h_oracle, _) = oracle.step(&[0.5], &[0.0, 0.0], &[0.0, 0.0]);

    for (e, o) in h_engine.iter().zip(&h_oracle) {
        assert!(rel_err(*e, *o) < 1e-12, "engine {e} vs oracle {o}");
    }
    // Frozen from an independent run of the same recurrence.
    let frozen = [0.04775975952078517, 0.012703991689539737];
    for (e, f) in h_engine.iter().zip(&frozen) {
        assert!(rel_err(*e, *f) < 1e-12, "engine {e} vs frozen {f}");
    }
}

#[test]
fn lstm_six_step_sequence_matches_oracle_fold_and_frozen_values() {
    let engine = engine_tiny_lstm();
    let oracle = support::tiny_lstm();
    let sequence = support::tiny_sequence();

    let (h_engine, cache) = engine.forward(&sequence).unwrap();
    assert_eq!(cache.len(), 6);
    let h_oracle = oracle.run(&sequence);

    for (e, o) in h_engine.iter().zip(&h_oracle) {
        assert!(rel_err(*e, *o) < 1e-12, "engine {e} vs oracle {o}");
    }
    let frozen = [0.021392150700414763, 0.09319072943250094];
    for (e, f) in h_engine.iter().zip(&frozen) {
        assert!(rel_err(*e, *f) < 1e-12, "engine {e} vs frozen {f}");
    }
}

#[test]
fn ffn_two_layer_matches_oracle_and_frozen_value() {
    let engine = engine_tiny_ffn();
    let oracle_layers = support::tiny_ffn();
    let input = [0.6, -0.4];

    let (y_engine, _) = engine.forward(&input).unwrap();
    let y_oracle = support::scalar_ffn(&oracle_layers, &input)[0];

    assert!(
        rel_err(y_engine, y_oracle) < 1e-12,
        "{y_engine} vs {y_oracle}"
    );
    let frozen = 0.30924718194268863;
    assert!(rel_err(y_engine, frozen) < 1e-12, "{y_engine} vs {frozen}");
}

#[test]
fn oracle_equivalence_holds_across_random_inputs() {
    // Same tiny weights, many inputs: the two routes must stay glued.
    let engine = engine_tiny_lstm();
    let oracle = support::tiny_lstm();
    for i in 0..50 {
        let x = ((i as f64) * 0.37).sin() * 2.0;
        let seq: Vec<Vec<f64>> = (0..4).map(|t| vec![x * (1.0 + 0.1 * t as f64)]).collect();
        let (h_engine, _) = engine.forward(&seq).unwrap();
        let h_oracle = oracle.run(&seq);
        for (e, o) in h_engine.iter().zip(&h_oracle) {
            assert!(rel_err(*e, *o) < 1e-12);
        }
    }
}

mod composed {
    //! The assembled disaggregation model against the scalar oracles
    //! chained by hand: scale context -> LSTM -> concat with scaled
    //! weather -> FFN, once for the daily branch and 24 times for the
    //! hourly branch.

    use super::rel_err;
    use super::support;
    use chrono::NaiveDate;
    use flowdisagg_core::neuralnet::{Activation, FfnParams, LstmParams, Matrix};
    use flowdisagg_core::scaler::Scaler;
    use flowdisagg_core::window::FeatureWindow;
    use flowdisagg_core::DisaggModel;

    /// mean 1, std 2 for the daily weather feature; mean 0.5, std 0.25 for
    /// the hourly one; mean 4, std 2 for flow. Fitted from two-point data
    /// so the statistics are exact.
    fn scaler(name: &str, lo: f64, hi: f64) -> Scaler {
        Scaler::fit_rows(
            vec![name.to_string()],
            [vec![lo], vec![hi]].iter().map(|r| r.as_slice()),
            1e-8,
        )
        .unwrap()
    }

    fn oracle_lstm() -> support::ScalarLstm {
        let mut cell = support::tiny_lstm();
        // widen the input weights to two inputs (weather, flow)
        cell.w_i = vec![vec![0.1, -0.3], vec![-0.2, 0.25]];
        cell.w_f = vec![vec![0.2, 0.15], vec![0.1, -0.05]];
        cell.w_g = vec![vec![0.4, -0.1], vec![-0.3, 0.2]];
        cell.w_o = vec![vec![-0.1, 0.3], vec![0.3, -0.2]];
        cell
    }

    fn oracle_ffn() -> Vec<(Vec<Vec<f64>>, Vec<f64>)> {
        vec![
            (
                vec![vec![0.3, -0.2, 0.5], vec![-0.4, 0.1, 0.2]],
                vec![0.05, -0.1],
            ),
            (vec![vec![0.6, -0.5]], vec![0.15]),
        ]
    }

    fn model() -> DisaggModel {
        let mut lstm = LstmParams::zeros(2, 2);
        lstm.w_input = Matrix::from_rows(vec![
            vec![0.1, -0.3],
            vec![-0.2, 0.25],
            vec![0.2, 0.15],
            vec![0.1, -0.05],
            vec![0.4, -0.1],
            vec![-0.3, 0.2],
            vec![-0.1, 0.3],
            vec![0.3, -0.2],
        ]);
        lstm.w_hidden = Matrix::from_rows(vec![
            vec![0.3, -0.1],
            vec![0.2, 0.4],
            vec![-0.3, 0.2],
            vec![0.1, -0.2],
            vec![0.1, 0.2],
            vec![-0.2, 0.1],
            vec![0.2, -0.4],
            vec![0.3, 0.1],
        ]);
        lstm.bias = vec![0.05, -0.05, 0.1, 0.0, 0.0, 0.2, -0.1, 0.05];

        let mut ffn = FfnParams::zeros(vec![3, 2, 1], Activation::Tanh);
        ffn.layers[0].weights = Matrix::from_rows(vec![vec![0.3, -0.2, 0.5], vec![-0.4, 0.1, 0.2]]);
        ffn.layers[0].bias = vec![0.05, -0.1];
        ffn.layers[1].weights = Matrix::from_rows(vec![vec![0.6, -0.5]]);
        ffn.layers[1].bias = vec![0.15];

        DisaggModel {
            lstm,
            ffn,
            daily_weather_scaler: scaler("w0", -1.0, 3.0), // mean 1, std 2
            hourly_weather_scaler: scaler("w0", 0.25, 0.75), // mean 0.5, std 0.25
            flow_scaler: scaler("flow", 2.0, 6.0),         // mean 4, std 2
            weather_names: vec!["w0".to_string()],
            context_days: 6,
            seed: 0,
        }
    }

    fn window() -> FeatureWindow {
        FeatureWindow::new(
            NaiveDate::from_ymd_opt(2020, 1, 7).unwrap(),
            (0..6)
                .map(|d| vec![0.5 + 0.3 * d as f64, 3.0 + 0.4 * d as f64])
                .collect(),
            vec![0.8],
            (0..24).map(|h| vec![0.3 + 0.02 * h as f64]).collect(),
            5.0,
            None,
            6,
        )
        .unwrap()
    }

    #[test]
    fn daily_and_hourly_forwards_match_hand_chained_oracles() {
        let model = model();
        let w = window();

        // by-hand scaling of the context and the weather rows
        let scaled_ctx: Vec<Vec<f64>> = w
            .context
            .iter()
            .map(|row| vec![(row[0] - 1.0) / 2.0, (row[1] - 4.0) / 2.0])
            .collect();
        let hidden = oracle_lstm().run(&scaled_ctx);

        let ffn = oracle_ffn();
        let daily_input = vec![hidden[0], hidden[1], (0.8 - 1.0) / 2.0];
        let daily_oracle = support::scalar_ffn(&ffn, &daily_input)[0];
        let daily_engine = model.daily_forward(&w).unwrap();
        assert!(
            rel_err(daily_engine, daily_oracle) < 1e-12,
            "daily: engine {daily_engine} vs oracle {daily_oracle}"
        );

        let hourly_engine = model.hourly_forward(&w).unwrap();
        for (h, engine) in hourly_engine.iter().enumerate() {
            let x = 0.3 + 0.02 * h as f64;
            let input = vec![hidden[0], hidden[1], (x - 0.5) / 0.25];
            let oracle = support::scalar_ffn(&ffn, &input)[0];
            assert!(
                rel_err(*engine, oracle) < 1e-12,
                "hour {h}: engine {engine} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn exact_predictor_scores_zero_losses() {
        // Zero weights with the output bias set to the scaled target make
        // both branches exact, so all three losses vanish.
        let mut model = model();
        let w = window();
        for layer in &mut model.ffn.layers {
            layer.weights.scale(0.0);
            for b in &mut layer.bias {
                *b = 0.0;
            }
        }
        let target_z = (5.0 - 4.0) / 2.0;
        model.ffn.layers.last_mut().unwrap().bias[0] = target_z;
        let lb = model.compute_losses(&w).unwrap();
        assert_eq!(lb.loss1, 0.0);
        assert_eq!(lb.loss2, 0.0);
        assert_eq!(lb.total, 0.0);
    }
}
