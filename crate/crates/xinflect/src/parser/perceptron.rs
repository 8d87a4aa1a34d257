//! Averaged perceptrons: a multi-class classifier over string features and
//! a single-vector scorer for structured arc updates. Averaging uses the
//! usual lazy total/timestamp bookkeeping.

use std::collections::HashMap;

/// Multi-class averaged perceptron trainer.
#[derive(Debug)]
pub struct MulticlassTrainer {
    n_classes: usize,
    weights: HashMap<String, Vec<f64>>,
    totals: HashMap<String, Vec<f64>>,
    stamps: HashMap<String, Vec<u64>>,
    step: u64,
}

impl MulticlassTrainer {
    pub fn new(n_classes: usize) -> Self {
        MulticlassTrainer {
            n_classes,
            weights: HashMap::new(),
            totals: HashMap::new(),
            stamps: HashMap::new(),
            step: 0,
        }
    }

    /// Argmax class under the current (non-averaged) weights; ties go to
    /// the smaller class id.
    pub fn predict(&self, features: &[String]) -> usize {
        predict_scores(&self.weights, self.n_classes, features)
    }

    pub fn update(&mut self, features: &[String], gold: usize, predicted: usize) {
        self.step += 1;
        if gold == predicted {
            return;
        }
        for f in features {
            self.bump(f, gold, 1.0);
            self.bump(f, predicted, -1.0);
        }
    }

    fn bump(&mut self, feature: &str, class: usize, delta: f64) {
        let n = self.n_classes;
        let w = self
            .weights
            .entry(feature.to_string())
            .or_insert_with(|| vec![0.0; n]);
        let t = self
            .totals
            .entry(feature.to_string())
            .or_insert_with(|| vec![0.0; n]);
        let s = self
            .stamps
            .entry(feature.to_string())
            .or_insert_with(|| vec![0; n]);
        t[class] += (self.step - s[class]) as f64 * w[class];
        s[class] = self.step;
        w[class] += delta;
    }

    /// Averaged weights over all update steps.
    pub fn finalize(mut self) -> HashMap<String, Vec<f64>> {
        let steps = self.step.max(1) as f64;
        for (f, w) in &self.weights {
            let t = self.totals.get_mut(f).unwrap();
            let s = &self.stamps[f];
            for c in 0..self.n_classes {
                t[c] += (self.step - s[c]) as f64 * w[c];
                t[c] /= steps;
            }
        }
        self.totals
    }
}

/// Argmax over per-class scores summed from a feature->weights map.
pub fn predict_scores(
    weights: &HashMap<String, Vec<f64>>,
    n_classes: usize,
    features: &[String],
) -> usize {
    let mut scores = vec![0.0f64; n_classes];
    for f in features {
        if let Some(w) = weights.get(f) {
            for (sc, wc) in scores.iter_mut().zip(w) {
                *sc += wc;
            }
        }
    }
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    best
}

/// Single weight-vector trainer for structured (MST-based) updates.
#[derive(Debug, Default)]
pub struct ArcScorerTrainer {
    weights: HashMap<String, f64>,
    totals: HashMap<String, f64>,
    stamps: HashMap<String, u64>,
    step: u64,
}

impl ArcScorerTrainer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn score(&self, features: &[String]) -> f64 {
        features
            .iter()
            .map(|f| self.weights.get(f).copied().unwrap_or(0.0))
            .sum()
    }

    /// Advance the update clock by one sentence.
    pub fn tick(&mut self) {
        self.step += 1;
    }

    pub fn update(&mut self, features: &[String], delta: f64) {
        for f in features {
            let w = self.weights.entry(f.to_string()).or_insert(0.0);
            let t = self.totals.entry(f.to_string()).or_insert(0.0);
            let s = self.stamps.entry(f.to_string()).or_insert(0);
            *t += (self.step - *s) as f64 * *w;
            *s = self.step;
            *w += delta;
        }
    }

    pub fn finalize(mut self) -> HashMap<String, f64> {
        let steps = self.step.max(1) as f64;
        for (f, w) in &self.weights {
            let t = self.totals.get_mut(f).unwrap();
            *t += (self.step - self.stamps[f]) as f64 * w;
            *t /= steps;
        }
        self.totals
    }
}

/// Sum averaged weights for a feature vector.
pub fn score_arc(weights: &HashMap<String, f64>, features: &[String]) -> f64 {
    features
        .iter()
        .map(|f| weights.get(f).copied().unwrap_or(0.0))
        .sum()
}
