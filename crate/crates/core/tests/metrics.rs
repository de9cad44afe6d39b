mod common;

use common::*;
use diacritics::metrics::{
    analyze_ambiguity, base_inventory, confusion, sample_errors, score_sequences, ConfusionMatrix, Count,
};
use diacritics::DiacriticsError;
use nnkernel::rng::stream;
use proptest::prelude::*;
use rand::Rng;

/// Same length as `reference`; each character is kept, swapped for a family
/// member, or replaced by something arbitrary.
fn corrupt(rng: &mut impl Rng, reference: &str) -> String {
    let table = hu();
    reference
        .chars()
        .map(|c| match rng.gen_range(0..10) {
            0..=5 => c,
            6..=8 => {
                let v = table.variants(c);
                v[rng.gen_range(0..v.len())]
            }
            _ => ['x', ' ', 'ő', '9'][rng.gen_range(0..4)],
        })
        .collect()
}

#[test]
fn metrics_equal_naive_recount() {
    let table = hu();
    let mut rng = stream(21, &[]);
    for _ in 0..1000 {
        let lines = rng.gen_range(1..5);
        let refs: Vec<String> = (0..lines)
            .map(|_| {
                let len = rng.gen_range(0..40);
                random_text(&mut rng, len)
            })
            .collect();
        let hyps: Vec<String> = refs.iter().map(|r| corrupt(&mut rng, r)).collect();
        assert_eq!(score_sequences(&refs, &hyps, &table).unwrap(), naive_metrics(&refs, &hyps, &table));
    }
}

#[test]
fn worked_examples() {
    let t = hu();
    let r = score_sequences(&["kék ég 42"], &["kek ég 42"], &t).unwrap();
    assert_eq!(r.alpha_word, Count { correct: 1, total: 2 });
    let same = ["Árvíztűrő tükörfúrógép", "kész."];
    let r = score_sequences(&same, &same, &t).unwrap();
    for c in [r.character, r.important_character, r.alpha_word, r.sequence] {
        assert_eq!(c.accuracy(), Some(1.0));
    }
}

#[test]
fn length_mismatch_names_the_line() {
    let err = score_sequences(&["ab", "kór"], &["ab", "ko"], &hu()).unwrap_err();
    assert!(matches!(err, DiacriticsError::LengthMismatch { line: 1, reference: 3, hypothesis: 2 }));
}

#[test]
fn report_serializes_counts_and_ratios() {
    let r = score_sequences(&["kórós"], &["koros"], &hu()).unwrap();
    let json = serde_json::to_value(r).unwrap();
    assert_eq!(json["character"]["correct"], 3);
    assert_eq!(json["character"]["accuracy"], 0.6);
    assert_eq!(json["alpha_word"]["total"], 1);
    let back: diacritics::metrics::MetricsReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, r);
}

/// Weighted F1 straight from the textbook definitions.
fn weighted_f1_oracle(cells: &[[f64; 2]; 2]) -> f64 {
    let total: f64 = cells.iter().flatten().sum();
    (0..2)
        .map(|k| {
            let row: f64 = cells[k].iter().sum();
            let col: f64 = cells.iter().map(|r| r[k]).sum();
            let (tpr, ppv) = (cells[k][k] / row, cells[k][k] / col);
            row / total * (2.0 * tpr * ppv / (tpr + ppv))
        })
        .sum()
}

#[test]
fn two_class_toy_confusion() {
    let m = ConfusionMatrix::from_counts(&hu(), &[('a', 'a', 10), ('a', 'á', 2), ('á', 'a', 1), ('á', 'á', 7)]).unwrap();
    let scores = m.class_scores();
    let a = scores.iter().find(|s| s.class == 'a').unwrap();
    assert_eq!(a.tpr, Some(10.0 / 12.0));
    assert_eq!(a.ppv, Some(10.0 / 11.0));
    let oracle = weighted_f1_oracle(&[[10.0, 2.0], [1.0, 7.0]]);
    // Frozen from the oracle: F1_a = 20/23, F1_á = 14/17.
    assert!((oracle - 0.851151).abs() < 1e-6);
    assert!((m.weighted_f1().unwrap() - oracle).abs() < 1e-12);
    assert_eq!((m.errors(), m.cross_family()), (3, 0));
}

#[test]
fn confusion_single_cell_and_identities() {
    let t = hu();
    let m = confusion(&["ó"], &["o"], &t).unwrap();
    assert_eq!(m.count('ó', 'o'), 1);
    assert_eq!(m.total(), 1);

    let mut rng = stream(22, &[]);
    let refs: Vec<String> = (0..50)
        .map(|_| {
            let len = rng.gen_range(0..60);
            random_text(&mut rng, len)
        })
        .collect();
    let hyps: Vec<String> = refs.iter().map(|r| corrupt(&mut rng, r)).collect();
    let m = confusion(&refs, &hyps, &t).unwrap();
    let report = score_sequences(&refs, &hyps, &t).unwrap();
    assert_eq!(m.total(), report.important_character.total);
    assert_eq!(m.total() - m.errors(), report.important_character.correct);
    let n = m.classes().len();
    let rows: u64 = (0..n).map(|i| m.row_sum(i)).sum();
    assert_eq!(rows, m.total());
    let text = m.to_text_table();
    assert!(text.contains("TPR") && text.contains("PPV"), "{text}");
}

#[test]
fn ambiguity_matches_hand_counts() {
    // Bases and their forms in this corpus:
    //   kor:   kor, kór          (ambiguous, 4 occurrences)
    //   koros: kórós, körös, koros (ambiguous, 3)
    //   meg:   meg, még          (ambiguous, 3)
    //   kek:   kék               (2)
    //   eg:    ég                (1)
    //   a:     a                 (3)
    //   A:     A  (case-sensitive, separate from "a")    (1)
    //   haz:   ház               (1)
    //   Ot:    Öt  (case-sensitive, separate from "ot")   (1)
    //   ot:    öt                (1)
    //   ur:    úr                (1)
    //   alma:  alma              (1)
    // "42" has no letters and "x1y" splits into the runs "x" and "y".
    //   x: x (1), y: y (1)
    let lines = [
        "A kór kor.",
        "kórós körös koros",
        "meg még meg kor kor",
        "kék ég, kék a ház 42",
        "Öt úr öt alma a a",
        "x1y",
    ];
    let s = analyze_ambiguity(&lines, &hu());
    assert_eq!(s.sequences, 6);
    assert_eq!(s.ambiguous_bases, 3);
    assert_eq!(s.ambiguous_words, 4 + 3 + 3);
    assert_eq!(s.unambiguous_bases, 11);
    assert_eq!(s.unambiguous_words, 2 + 1 + 3 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1);
    assert_eq!(s.words, 24);
    assert_eq!(s.word_ratio, Some(14.0 / 10.0));
    assert_eq!(s.base_ratio, Some(11.0 / 3.0));
    let inv = base_inventory(&lines, &hu());
    assert_eq!(inv["koros"].1.len(), 3);
    assert!(inv.contains_key("A") && inv.contains_key("a"));
}

#[test]
fn error_samples_are_uniform_and_reproducible() {
    let refs: Vec<String> = (0..20).map(|i| format!("{i} kórós kör {i}")).collect();
    let hyps: Vec<String> = refs.iter().map(|r| hu().dediacritize(r)).collect();
    // ó, ó and ö: 3 mismatches per line.
    let all = sample_errors(&refs, &hyps, 1000, 1).unwrap();
    assert_eq!(all.total_errors, 60);
    assert_eq!(all.samples.len(), 60);
    assert!(all.notice.is_some());
    let a = sample_errors(&refs, &hyps, 10, 9).unwrap();
    assert_eq!(a, sample_errors(&refs, &hyps, 10, 9).unwrap());
    assert_eq!(a.samples.len(), 10);
    assert!(a.notice.is_none());
    // Each of the 60 errors is picked with probability 1/6.
    let mut hits = vec![0u32; 60];
    for seed in 0..2000 {
        for s in sample_errors(&refs, &hyps, 10, seed).unwrap().samples {
            let within = [3, 5, 9];
            let offset = if s.line >= 10 { 1 } else { 0 };
            let k = within.iter().position(|&p| p + offset == s.position).unwrap();
            hits[s.line * 3 + k] += 1;
        }
    }
    // Expected 333 each; 5 standard deviations is about 83.
    assert!(hits.iter().all(|&h| (250..=417).contains(&h)), "{hits:?}");
}

proptest! {
    #[test]
    fn jointly_permuting_pairs_keeps_metrics(seed in 0u64..1000, rot in 0usize..8) {
        let table = hu();
        let mut rng = stream(seed, &[]);
        let refs: Vec<String> = (0..8).map(|_| { let n = rng.gen_range(0..30); random_text(&mut rng, n) }).collect();
        let hyps: Vec<String> = refs.iter().map(|r| corrupt(&mut rng, r)).collect();
        let (mut r2, mut h2) = (refs.clone(), hyps.clone());
        r2.rotate_left(rot);
        h2.rotate_left(rot);
        prop_assert_eq!(score_sequences(&refs, &hyps, &table).unwrap(), score_sequences(&r2, &h2, &table).unwrap());
    }

    #[test]
    fn identity_hypothesis_scores_one(seed in 0u64..1000) {
        let mut rng = stream(seed, &[1]);
        let refs: Vec<String> = (0..4).map(|_| { let n = rng.gen_range(1..30); random_text(&mut rng, n) }).collect();
        let r = score_sequences(&refs, &refs, &hu()).unwrap();
        prop_assert_eq!(r.character.correct, r.character.total);
        prop_assert_eq!(r.sequence.correct, 4);
        prop_assert_eq!(r.alpha_word.correct, r.alpha_word.total);
    }
}
