#![allow(dead_code)]

use std::path::PathBuf;

use diacritics::atcn::{AtcnConfig, AtcnModel, CharVocab, UpsamplerKind};
use diacritics::corpus::DiacriticTable;
use diacritics::metrics::{Count, MetricsReport};
use nnkernel::gradcheck::{check_gradient, GradCheckReport};
use nnkernel::loss::softmax_cross_entropy_batch;
use nnkernel::rng::stream;
use rand::Rng;

pub fn hu() -> DiacriticTable {
    DiacriticTable::for_language("hu").unwrap()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// The 50 real Hungarian sentences.
pub fn toy_corpus() -> Vec<String> {
    std::fs::read_to_string(fixture("hu_toy.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

/// E=4, C=8, two blocks with dilations 1 and 2, k=3.
pub fn micro_config() -> AtcnConfig {
    AtcnConfig {
        embedding_dim: 4,
        channels: 8,
        num_blocks: 2,
        dilations: vec![1, 2],
        convs_per_block: 2,
        kernel_size: 3,
        dropout_rate: 0.2,
        max_sequence_length: 64,
        upsampler: UpsamplerKind::ScalarCopy,
    }
}

/// PAD, UNK and five characters: V = 7.
pub fn micro_vocab() -> CharVocab {
    CharVocab::from_chars(['a', 'b', 'e', 'á', 'é']).unwrap()
}

pub fn flat_params(model: &AtcnModel<f64>) -> Vec<f64> {
    model.parameters().iter().flat_map(|(_, t)| t.data().iter().copied()).collect()
}

pub fn set_params(model: &mut AtcnModel<f64>, values: &[f64]) {
    let mut offset = 0;
    for t in model.parameters_mut() {
        let n = t.len();
        t.data_mut().copy_from_slice(&values[offset..offset + n]);
        offset += n;
    }
    assert_eq!(offset, values.len());
}

pub fn flat_grads(model: &AtcnModel<f64>) -> Vec<f64> {
    model
        .parameters()
        .iter()
        .flat_map(|(_, t)| t.grad().map(|g| g.to_vec()).unwrap_or_else(|| vec![0.0; t.len()]))
        .collect()
}

/// Finite-difference check of the whole training-mode network (embedding
/// through loss) on a micro model, one random batch per seed.
pub fn micro_gradcheck(seed: u64) -> GradCheckReport {
    let mut rng = stream(seed, &[0xE2E]);
    let vocab = micro_vocab();
    let v = vocab.size();
    let mut model = AtcnModel::<f32>::new(micro_config(), vocab, None, seed).unwrap().cast::<f64>();
    // Move every parameter off its initial value so zero-initialized biases
    // and unit batch-norm scales are exercised too.
    let mut params = flat_params(&model);
    for p in &mut params {
        *p += rng.gen_range(-0.2..0.2);
    }
    set_params(&mut model, &params);

    let n_max = 9;
    let lengths = vec![n_max, rng.gen_range(3..=n_max)];
    let ids: Vec<u32> = (0..2 * n_max).map(|_| rng.gen_range(2..v as u32)).collect();
    let targets: Vec<u32> = (0..2 * n_max).map(|_| rng.gen_range(2..v as u32)).collect();
    let mask: Vec<bool> = (0..2 * n_max).map(|i| i % n_max < lengths[i / n_max]).collect();
    let dropout_seed = seed ^ 0x5eed;

    let loss = |m: &mut AtcnModel<f64>| {
        let (logits, _) = m.forward_train(&ids, &lengths, n_max, dropout_seed).unwrap();
        softmax_cross_entropy_batch(&logits, &targets, &mask, 2, v, n_max).unwrap().0
    };
    model.zero_grad();
    let (logits, cache) = model.forward_train(&ids, &lengths, n_max, dropout_seed).unwrap();
    let (_, grad) = softmax_cross_entropy_batch(&logits, &targets, &mask, 2, v, n_max).unwrap();
    model.backward(&cache, &grad).unwrap();
    let analytic = flat_grads(&model);

    let mut probe = model.clone();
    check_gradient(&mut params, &analytic, 1e-6, |x| {
        set_params(&mut probe, x);
        loss(&mut probe)
    })
}

/// Perturbs the input character at the middle of a length-`n` sequence and
/// returns how far to the left and right the eval-mode logits change.
pub fn measured_radius(config: &AtcnConfig, n: usize, seed: u64) -> (usize, usize) {
    let vocab = CharVocab::from_chars('a'..='z').unwrap();
    let v = vocab.size() as u32;
    let model = AtcnModel::<f32>::new(config.clone(), vocab, None, seed).unwrap().cast::<f64>();
    let mut rng = stream(seed, &[0xF1E1D]);
    let mut ids: Vec<u32> = (0..n).map(|_| rng.gen_range(2..v)).collect();
    let base = model.forward_eval(&ids, &[n], n).unwrap();
    let q = n / 2;
    ids[q] = if ids[q] == 2 { 3 } else { 2 };
    let moved = model.forward_eval(&ids, &[n], n).unwrap();
    let vs = v as usize;
    let changed: Vec<usize> = (0..n)
        .filter(|&t| (0..vs).any(|c| base[c * n + t] != moved[c * n + t]))
        .collect();
    let lo = *changed.first().expect("the perturbed position itself changes");
    let hi = *changed.last().unwrap();
    (q - lo, hi - q)
}

/// Independent recount of the four accuracies.
pub fn naive_metrics(refs: &[String], hyps: &[String], table: &DiacriticTable) -> MetricsReport {
    let mut m = MetricsReport::default();
    let bump = |c: &mut Count, ok: bool| {
        c.total += 1;
        if ok {
            c.correct += 1;
        }
    };
    for (r, h) in refs.iter().zip(hyps) {
        let rc: Vec<char> = r.chars().collect();
        let hc: Vec<char> = h.chars().collect();
        for i in 0..rc.len() {
            bump(&mut m.character, rc[i] == hc[i]);
            if table.variants(table.base(rc[i])).len() > 1 {
                bump(&mut m.important_character, rc[i] == hc[i]);
            }
        }
        // Tokens: maximal runs between whitespace, located by scanning
        // split boundaries of the reference.
        let mut pos = 0;
        for word in r.split(char::is_whitespace) {
            let len = word.chars().count();
            if word.chars().any(char::is_alphabetic) {
                bump(&mut m.alpha_word, rc[pos..pos + len] == hc[pos..pos + len]);
            }
            pos += len + 1;
        }
        bump(&mut m.sequence, r == h);
    }
    m
}

/// Random string over a mix of ASCII, Hungarian letters and a few foreign
/// characters.
pub fn random_text(rng: &mut impl Rng, len: usize) -> String {
    const POOL: &[char] = &[
        'a', 'b', 'c', 'e', 'k', 'o', 's', 'z', 'A', 'E', 'O', 'á', 'é', 'í', 'ó', 'ö', 'ő', 'ú', 'ü', 'ű', 'Á', 'Ő',
        ' ', ' ', '.', ',', '-', '1', '7', 'ß', 'ж', '中', '\t',
    ];
    (0..len).map(|_| POOL[rng.gen_range(0..POOL.len())]).collect()
}
