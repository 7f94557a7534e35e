use abusenet::cli::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CheckpointError, ExpectedDims,
};
use abusenet::model::{Classifier, ModelDims, ModelParams};
use abusenet::numcore::{Matrix, RngStream};
use abusenet::preprocess::{TokenSequence, UnigramTable};
use abusenet::vocab::Vocabulary;

fn model(bidirectional: bool, attention: bool) -> Classifier {
    let vocab = Vocabulary::build(&[TokenSequence::new(["you", "are", "a", "stupid", "person", "you"])], 1);
    let dims = ModelDims {
        vocab: vocab.len(),
        embed: 4,
        hidden: 3,
        attn: 2,
        bidirectional,
        attention,
    };
    let mut rng = RngStream::new(1);
    let mut emb = Matrix::zeros(vocab.len(), 4);
    for v in emb.as_mut_slice() {
        *v = rng.uniform(-1.0, 1.0);
    }
    Classifier {
        params: ModelParams::init(dims, emb, 9).unwrap(),
        vocab,
        table: UnigramTable::from_counts([("you", 2), ("stupid", 1), ("person", 1)]),
        max_len: 7,
    }
}

#[test]
fn roundtrip_is_bit_identical() {
    for (bi, attn) in [(true, true), (false, true), (true, false), (false, false)] {
        let m = model(bi, attn);
        let bytes = encode_checkpoint(&m);
        let back = decode_checkpoint(&bytes, &ExpectedDims::default()).unwrap();
        assert_eq!(back.params, m.params);
        assert_eq!(back.vocab, m.vocab);
        assert_eq!(back.table.sorted_entries(), m.table.sorted_entries());
        assert_eq!(back.max_len, 7);
        assert_eq!(encode_checkpoint(&back), bytes);
    }
}

#[test]
fn file_roundtrip_and_prediction_survive() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ablm");
    let m = model(true, true);
    save_checkpoint(&m, &path).unwrap();
    let back = load_checkpoint(&path, &ExpectedDims::default()).unwrap();
    let a = m.predict_text("you are a stupidperson").unwrap();
    let b = back.predict_text("you are a stupidperson").unwrap();
    assert_eq!(a, b);
}

#[test]
fn header_layout_is_little_endian() {
    let bytes = encode_checkpoint(&model(true, true));
    assert_eq!(&bytes[..5], b"ABLM1");
    assert_eq!(bytes[5..9], 1u32.to_le_bytes());
    // vocab size: pad, unk and five words.
    assert_eq!(bytes[9..13], 7u32.to_le_bytes());
}

#[test]
fn wrong_magic_is_rejected() {
    let mut bytes = encode_checkpoint(&model(true, true));
    bytes[0] = b'X';
    assert!(matches!(decode_checkpoint(&bytes, &ExpectedDims::default()), Err(CheckpointError::BadMagic)));
    assert!(matches!(decode_checkpoint(b"AB", &ExpectedDims::default()), Err(CheckpointError::BadMagic)));
}

#[test]
fn future_version_is_rejected() {
    let mut bytes = encode_checkpoint(&model(true, true));
    bytes[5..9].copy_from_slice(&2u32.to_le_bytes());
    assert!(matches!(
        decode_checkpoint(&bytes, &ExpectedDims::default()),
        Err(CheckpointError::Version { found: 2 })
    ));
}

#[test]
fn every_truncation_is_detected() {
    let bytes = encode_checkpoint(&model(false, true));
    for cut in 5..bytes.len() {
        match decode_checkpoint(&bytes[..cut], &ExpectedDims::default()) {
            Err(CheckpointError::Truncated { .. }) => {}
            other => panic!("cut at {cut}: {other:?}"),
        }
    }
}

#[test]
fn requested_hidden_size_must_match() {
    let bytes = encode_checkpoint(&model(true, true));
    let want = ExpectedDims {
        hidden: Some(128),
        ..Default::default()
    };
    let err = decode_checkpoint(&bytes, &want).unwrap_err();
    assert!(matches!(
        err,
        CheckpointError::Dimension {
            field: "hidden size",
            expected: 128,
            found: 3
        }
    ));
    let msg = err.to_string();
    assert!(msg.contains("128") && msg.contains('3'), "{msg}");
    let ok = ExpectedDims {
        hidden: Some(3),
        max_len: Some(7),
        ..Default::default()
    };
    assert!(decode_checkpoint(&bytes, &ok).is_ok());
}

#[test]
fn tensor_shape_mismatch_is_a_shape_error() {
    let m = model(true, true);
    let mut bytes = encode_checkpoint(&m);
    // The first tensor is the embedding: find its dims after the name.
    let name = b"embedding";
    let at = bytes.windows(name.len()).position(|w| w == name).unwrap() + name.len();
    // rank (4 bytes) then rows: claim one row fewer.
    let rows_at = at + 4;
    let rows = u32::from_le_bytes(bytes[rows_at..rows_at + 4].try_into().unwrap());
    bytes[rows_at..rows_at + 4].copy_from_slice(&(rows - 1).to_le_bytes());
    assert!(matches!(
        decode_checkpoint(&bytes, &ExpectedDims::default()),
        Err(CheckpointError::Shape { .. })
    ));
}

#[test]
fn trailing_bytes_are_rejected() {
    let mut bytes = encode_checkpoint(&model(true, false));
    bytes.push(0);
    assert!(matches!(
        decode_checkpoint(&bytes, &ExpectedDims::default()),
        Err(CheckpointError::Malformed(_))
    ));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_checkpoint(&dir.path().join("absent"), &ExpectedDims::default()),
        Err(CheckpointError::Io { .. })
    ));
}
