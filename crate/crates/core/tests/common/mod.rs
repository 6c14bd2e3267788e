#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use secnet_core::gf::{field_make, Field, FieldMatrix};
use secnet_core::netmodel::{build_relay, DecoderCode, LocalMap, MessageSpec, NetworkCode, NetworkSpec, NodeCode};

pub fn prime_field(q: u32) -> Field {
    field_make(q, 1).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, field: &Field, rows: usize, cols: usize) -> FieldMatrix {
    let q = field.q();
    let data: Vec<Vec<u32>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..q)).collect()).collect();
    if rows == 0 {
        return FieldMatrix::zeros(field, 0, cols);
    }
    FieldMatrix::from_rows(field, &data).unwrap()
}

/// A random scalar linear code on the relay `k = (2, 2)`, `r = (1, 1)` with
/// one message symbol. When the relay holds no scrambles and the terminal
/// can recover the message, a decoder is attached.
pub fn random_relay_code(rng: &mut ChaCha8Rng, q: u32, source_scrambles: usize, relay_scrambles: usize) -> (NetworkSpec, NetworkCode) {
    let spec = build_relay(2, &[2, 2], &[1, 1], q as u64, &[]).unwrap();
    let field = prime_field(q);
    let first = random_matrix(rng, &field, 2, 1 + source_scrambles);
    let second = random_matrix(rng, &field, 2, relay_scrambles + 2);
    let mut decoders = Vec::new();
    if relay_scrambles == 0 {
        let end_to_end = second.mul(&first).unwrap();
        let mut target = vec![0u32; 1 + source_scrambles];
        target[0] = 1;
        if let Ok(d) = end_to_end.transpose().solve(&target) {
            decoders.push(DecoderCode {
                node: 3,
                messages: vec![0],
                map: LocalMap::Linear(FieldMatrix::from_rows(&field, &[d]).unwrap()),
            });
        }
    }
    let code = NetworkCode {
        n: 1,
        field: field.clone(),
        messages: vec![MessageSpec { source: 1, terminal: 3, symbols: 1 }],
        nodes: vec![
            NodeCode { node: 1, scrambles: source_scrambles, map: LocalMap::Linear(first) },
            NodeCode { node: 2, scrambles: relay_scrambles, map: LocalMap::Linear(second) },
        ],
        decoders,
    };
    code.check(&spec).unwrap();
    (spec, code)
}
