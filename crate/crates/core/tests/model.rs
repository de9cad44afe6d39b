mod common;

use common::*;
use diacritics::atcn::{capacity_for, AtcnConfig, AtcnModel, CharVocab, Decoding, Upsampler, UpsamplerKind};
use diacritics::corpus::SequenceBatch;
use nnkernel::loss::softmax_cross_entropy_batch;
use nnkernel::rng::stream;
use rand::Rng;

#[test]
fn end_to_end_gradients_match_finite_differences() {
    for seed in 0..20 {
        let r = micro_gradcheck(seed);
        assert!(r.max_rel_err < 1e-3, "seed {seed}: {r:?}");
        assert!(r.checked > 900);
    }
}

#[test]
fn full_projection_upsampler_gradients() {
    for seed in 0..4 {
        let mut cfg = micro_config();
        cfg.upsampler = UpsamplerKind::FullProjection;
        let vocab = micro_vocab();
        let v = vocab.size();
        let mut model = AtcnModel::<f32>::new(cfg, vocab, None, seed).unwrap().cast::<f64>();
        let mut rng = stream(seed, &[77]);
        let n = 7;
        let ids: Vec<u32> = (0..n).map(|_| rng.gen_range(2..v as u32)).collect();
        let targets: Vec<u32> = (0..n).map(|_| rng.gen_range(2..v as u32)).collect();
        let mask = vec![true; n];
        model.zero_grad();
        let (logits, cache) = model.forward_train(&ids, &[n], n, 3).unwrap();
        let (_, g) = softmax_cross_entropy_batch(&logits, &targets, &mask, 1, v, n).unwrap();
        model.backward(&cache, &g).unwrap();
        let analytic = flat_grads(&model);
        let mut x = flat_params(&model);
        let mut probe = model.clone();
        let r = nnkernel::gradcheck::check_gradient(&mut x, &analytic, 1e-6, |p| {
            set_params(&mut probe, p);
            let (l, _) = probe.forward_train(&ids, &[n], n, 3).unwrap();
            softmax_cross_entropy_batch(&l, &targets, &mask, 1, v, n).unwrap().0
        });
        assert!(r.max_rel_err < 1e-3, "seed {seed}: {r:?}");
    }
}

#[test]
fn default_receptive_field_is_121() {
    let cfg = AtcnConfig::default();
    assert_eq!(cfg.receptive_radius(), 60);
    assert_eq!(cfg.receptive_field(), 121);
    assert_eq!(measured_radius(&cfg, 201, 1), (60, 60));
}

#[test]
fn receptive_radius_matches_formula_on_random_configs() {
    let mut rng = stream(5, &[]);
    for _ in 0..5 {
        let num_blocks = rng.gen_range(1..=4);
        let cfg = AtcnConfig {
            embedding_dim: 8,
            channels: 24,
            num_blocks,
            dilations: (0..num_blocks).map(|_| 1 << rng.gen_range(0..4)).collect(),
            convs_per_block: rng.gen_range(1..=3),
            kernel_size: [3, 5, 7][rng.gen_range(0..3)],
            ..AtcnConfig::default()
        };
        let r = cfg.receptive_radius();
        let expected = cfg.convs_per_block * (cfg.kernel_size - 1) / 2 * cfg.dilations.iter().sum::<usize>();
        assert_eq!(r, expected);
        assert_eq!(measured_radius(&cfg, 2 * r + 31, 9), (r, r), "{cfg:?}");
    }
}

#[test]
fn zero_residual_branches_are_identity() {
    let vocab = micro_vocab();
    let v = vocab.size();
    let mut model = AtcnModel::<f32>::new(micro_config(), vocab, None, 4).unwrap().cast::<f64>();
    for block in &mut model.blocks {
        for conv in &mut block.convs {
            conv.weight.data_mut().fill(0.0);
            conv.bias.data_mut().fill(0.0);
        }
    }
    let Upsampler::ScalarCopy { weight, bias } = &mut model.upsampler else {
        unreachable!()
    };
    weight.data_mut().copy_from_slice(&[0.5, -1.5]);
    bias.data_mut().copy_from_slice(&[0.25, 0.1]);
    let (e, c) = (4, 8);
    let ids = [2u32, 6, 3, 3, 5];
    let n = ids.len();
    let logits = model.forward_eval(&ids, &[n], n).unwrap();

    let Upsampler::ScalarCopy { weight, bias } = &model.upsampler else {
        unreachable!()
    };
    let (w, b) = (weight.data(), bias.data());
    let emb = model.embedding.data();
    let pw = model.projection.weight.data();
    let pb = model.projection.bias.data();
    for (t, &id) in ids.iter().enumerate() {
        let up: Vec<f64> = (0..c).map(|ch| w[ch / e] * emb[id as usize * e + ch % e] + b[ch / e]).collect();
        for k in 0..v {
            let expected = pb[k] + (0..c).map(|ch| pw[k * c + ch] * up[ch]).sum::<f64>();
            assert!((logits[k * n + t] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_model_gives_uniform_predictions() {
    let vocab = micro_vocab();
    let v = vocab.size();
    let model = AtcnModel::<f64>::zeroed(micro_config(), vocab, None).unwrap();
    let batch = SequenceBatch::from_pairs(&model.vocab, &[("abe", "ábé"), ("a", "á")]).unwrap();
    let logits = model.forward_eval(&batch.input_ids, &batch.lengths, batch.n_max).unwrap();
    assert!(logits.iter().all(|&x| x == 0.0));
    let (loss, _) =
        softmax_cross_entropy_batch(&logits, &batch.target_ids, &batch.mask, 2, v, batch.n_max).unwrap();
    assert!((loss - (v as f64).ln()).abs() < 1e-12);
}

fn micro_hu_model(seed: u64) -> AtcnModel<f32> {
    let table = hu();
    let vocab = CharVocab::build(["abcekosz .,-17"], 1, Some(&table)).unwrap();
    AtcnModel::new(micro_config(), vocab, Some("hu".into()), seed).unwrap()
}

#[test]
fn restore_preserves_length_on_random_strings() {
    let model = micro_hu_model(1);
    let mut rng = stream(11, &[]);
    let texts: Vec<String> = (0..1000)
        .map(|_| {
            let len = rng.gen_range(1..=600);
            random_text(&mut rng, len)
        })
        .collect();
    for decoding in [Decoding::Unconstrained, Decoding::VariantConstrained] {
        let out = model.restore_lines(&texts, decoding).unwrap();
        for (a, b) in texts.iter().zip(&out) {
            assert_eq!(a.chars().count(), b.chars().count());
        }
    }
}

#[test]
fn constrained_decoding_stays_in_family() {
    let model = micro_hu_model(2);
    let table = hu();
    let text = "kor es ut, szel a fa alatt 1977-ben";
    let out = model.restore(text, Decoding::VariantConstrained).unwrap();
    for (a, b) in text.chars().zip(out.chars()) {
        assert!(table.variants(a).contains(&b), "{a} -> {b}");
    }
}

#[test]
fn padded_inference_is_bit_exact() {
    let table = hu();
    let vocab = CharVocab::build(["abcdefghijklmnopqrstuvwxyz .,"], 1, Some(&table)).unwrap();
    let model = AtcnModel::<f32>::new(AtcnConfig::default(), vocab, Some("hu".into()), 3).unwrap();
    let mut rng = stream(12, &[]);
    for len in [1, 7, 60, 333, 511, 512, 513, 700] {
        let text = random_text(&mut rng, len);
        let chars: Vec<char> = text.chars().collect();
        let tight = SequenceBatch::with_capacity(&model.vocab, &[chars.clone()], len).unwrap();
        let cap = capacity_for(len);
        let wide = SequenceBatch::with_capacity(&model.vocab, &[chars], cap).unwrap();
        let a = model.forward_eval(&tight.input_ids, &tight.lengths, len).unwrap();
        let b = model.forward_eval(&wide.input_ids, &wide.lengths, cap).unwrap();
        let v = model.vocab_size();
        for k in 0..v {
            for t in 0..len {
                assert_eq!(a[k * len + t].to_bits(), b[k * cap + t].to_bits(), "len {len} label {k} pos {t}");
            }
        }
        assert_eq!(
            model.restore(&text, Decoding::Unconstrained).unwrap(),
            model.restore_padded(&text, cap, Decoding::Unconstrained).unwrap()
        );
    }
}

#[test]
fn batch_composition_does_not_change_outputs() {
    let model = micro_hu_model(5);
    let mut rng = stream(13, &[]);
    let texts: Vec<String> = (0..40)
        .map(|_| {
            let len = rng.gen_range(1..=90);
            random_text(&mut rng, len)
        })
        .collect();
    let together = model.restore_lines(&texts, Decoding::Unconstrained).unwrap();
    for (t, r) in texts.iter().zip(&together) {
        assert_eq!(&model.restore(t, Decoding::Unconstrained).unwrap(), r);
    }
}

#[test]
fn capacity_doubles_from_512() {
    assert_eq!(capacity_for(0), 512);
    assert_eq!(capacity_for(512), 512);
    assert_eq!(capacity_for(513), 1024);
    assert_eq!(capacity_for(1025), 2048);
}

#[test]
fn empty_and_unknown_input() {
    let model = micro_hu_model(6);
    assert_eq!(model.restore("", Decoding::Unconstrained).unwrap(), "");
    let out = model.restore("中文ж", Decoding::Unconstrained).unwrap();
    assert_eq!(out.chars().count(), 3);
}

#[test]
fn training_mode_updates_running_statistics_only() {
    let mut model = micro_hu_model(7);
    let before = model.clone();
    let batch = SequenceBatch::from_pairs(&model.vocab, &[("kor es", "kór és")]).unwrap();
    model
        .forward_train(&batch.input_ids, &batch.lengths, batch.n_max, 1)
        .unwrap();
    assert_eq!(model.parameters().len(), before.parameters().len());
    for ((_, a), (_, b)) in model.parameters().iter().zip(before.parameters()) {
        assert_eq!(a.data(), b.data());
    }
    assert_ne!(model.blocks[0].norms[0].running_mean, before.blocks[0].norms[0].running_mean);
}
