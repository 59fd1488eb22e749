use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use nrec_core::coder::{decode_stream, encode_stream, BlockCoder};
use nrec_core::context::{fit_trees, train, Smoothing};
use nrec_core::corpus::gen_synthetic;
use nrec_core::dictionary::build_dictionary;
use nrec_core::geometry::ShapeInventory;
use nrec_core::transform::{default_k_max, omp, quantize_batch, CoefficientBlock, QuantParams};

const BLOCKS: usize = 500;

fn blocks(id: usize, n: usize, step: f64) -> Vec<CoefficientBlock> {
    let inv = ShapeInventory::build();
    let s = inv.shape(id).unwrap();
    let d = build_dictionary(s);
    let res = gen_synthetic(s, 0.9, 10.0, 7, n).unwrap();
    let codes: Vec<_> = res.iter().map(|b| omp(&d, &b.signal(&s.mask), 1e-3, default_k_max(&d)).unwrap()).collect();
    quantize_batch(&codes, &d, QuantParams::new(step).unwrap()).unwrap()
}

fn geometry(c: &mut Criterion) {
    c.bench_function("shape_inventory", |b| b.iter(ShapeInventory::build));
}

fn dictionary(c: &mut Criterion) {
    let inv = ShapeInventory::build();
    for id in [3, 9, 11] {
        let s = inv.shape(id).unwrap();
        c.bench_function(&format!("dictionary_gram_shape{id}"), |b| {
            b.iter(|| {
                let d = build_dictionary(black_box(s));
                d.gram().len()
            })
        });
    }
}

fn sparse(c: &mut Criterion) {
    let inv = ShapeInventory::build();
    for id in [3, 9, 11] {
        let s = inv.shape(id).unwrap();
        let d = build_dictionary(s);
        d.gram();
        let res = gen_synthetic(s, 0.9, 10.0, 3, 16).unwrap();
        let sigs: Vec<_> = res.iter().map(|b| b.signal(&s.mask)).collect();
        let k = default_k_max(&d);
        c.bench_function(&format!("omp_shape{id}"), |b| {
            let mut i = 0;
            b.iter(|| {
                i = (i + 1) % sigs.len();
                omp(&d, &sigs[i], 1e-3, k).unwrap()
            })
        });
    }
}

fn coder(c: &mut Criterion) {
    let data = blocks(9, BLOCKS, 20.0);
    let f = fit_trees(&build_dictionary(ShapeInventory::build().shape(9).unwrap()), &data, 4, 0.2, 1e-4, Smoothing::KrichevskyTrofimov)
        .unwrap();
    c.bench_function("encode_static_ctm_shape9", |b| {
        b.iter(|| {
            let mut coder = BlockCoder::with_static_model(&f.merged, &f.merged_model).unwrap();
            encode_stream(9, &data, &mut coder).unwrap().bytes.len()
        })
    });
    let mut coder = BlockCoder::adaptive(&f.merged);
    let stream = encode_stream(9, &data, &mut coder).unwrap();
    c.bench_function("decode_adaptive_ctm_shape9", |b| {
        b.iter_batched(
            || BlockCoder::adaptive(&f.merged),
            |mut coder| decode_stream(&stream.bytes, &mut coder).unwrap().1.len(),
            BatchSize::SmallInput,
        )
    });
}

fn training(c: &mut Criterion) {
    let inv = ShapeInventory::build();
    let d = build_dictionary(inv.shape(9).unwrap());
    let data = blocks(9, BLOCKS, 20.0);
    c.bench_function("fit_trees_shape9", |b| {
        b.iter(|| fit_trees(&d, &data, 4, 0.2, 1e-4, Smoothing::KrichevskyTrofimov).unwrap().merged.total_leaves())
    });
    let f = fit_trees(&d, &data, 4, 0.2, 1e-4, Smoothing::KrichevskyTrofimov).unwrap();
    c.bench_function("count_ctm_shape9", |b| b.iter(|| train(&data, &f.merged, Smoothing::KrichevskyTrofimov).total()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = geometry, dictionary, sparse, coder, training
}
criterion_main!(benches);
