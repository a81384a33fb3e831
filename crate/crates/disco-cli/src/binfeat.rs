//! Flat binary feature blocks: a 16-byte header (`DSCF`, format version,
//! num_edus, dim as little-endian u32s) followed by row-major f32 data.

use std::fs;
use std::path::Path;

use disco_core::features::{FeatureMatrix, FEATURE_DIM};

use crate::error::CliError;

const MAGIC: [u8; 4] = *b"DSCF";
const BIN_VERSION: u32 = 1;

pub fn write_block(path: &Path, matrix: &FeatureMatrix) -> Result<(), CliError> {
    let mut bytes = Vec::with_capacity(16 + matrix.data().len() * 4);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&BIN_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(matrix.num_edus() as u32).to_le_bytes());
    bytes.extend_from_slice(&(matrix.dim() as u32).to_le_bytes());
    for &x in matrix.data() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| CliError::io_at(path, e))
}

pub fn read_block(path: &Path) -> Result<FeatureMatrix, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io_at(path, e))?;
    let fail = |msg: &str| CliError::validation(format!("{}: {msg}", path.display()));
    if bytes.len() < 16 || bytes[..4] != MAGIC {
        return Err(fail("not a feature block (bad magic)"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    if word(4) != BIN_VERSION {
        return Err(CliError::version(path, word(4).to_string()));
    }
    let num_edus = word(8) as usize;
    let dim = word(12) as usize;
    if dim != FEATURE_DIM {
        return Err(fail(&format!("dim {dim} (expected {FEATURE_DIM})")));
    }
    let expected = 16 + num_edus * dim * 4;
    if bytes.len() != expected {
        return Err(fail(&format!("{} bytes, expected {expected}", bytes.len())));
    }
    let mut rows = Vec::with_capacity(num_edus);
    for e in 0..num_edus {
        let mut row = Vec::with_capacity(dim);
        for d in 0..dim {
            let at = 16 + (e * dim + d) * 4;
            row.push(f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()));
        }
        rows.push(row);
    }
    FeatureMatrix::from_rows(rows).ok_or_else(|| fail("inconsistent row widths"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use disco_core::features::encode_document;
    use disco_core::graph::{build_coref_graph, RstEdge, RstGraph};

    #[test]
    fn blocks_round_trip() {
        let rst = RstGraph::from_edges(
            3,
            vec![RstEdge {
                source: 0,
                target: 1,
                relation: 1,
            }],
        )
        .unwrap();
        let coref = build_coref_graph(3, &[vec![0, 2]]).unwrap();
        let matrix = encode_document(&rst, Some(&coref)).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.feat");
        write_block(&path, &matrix).unwrap();
        let round = read_block(&path).unwrap();
        assert_eq!(round, matrix);
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.feat");
        fs::write(&path, b"NOPE").unwrap();
        assert!(read_block(&path).is_err());
    }
}
