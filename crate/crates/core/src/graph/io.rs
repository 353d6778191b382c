//! Binary graph dump for caching sampled instances.
//!
//! Layout, all integers little-endian:
//!
//! | field      | type          |
//! |------------|---------------|
//! | magic      | 8 bytes `MDGRAPH\0` |
//! | version    | u32           |
//! | n          | u64           |
//! | edge_count | u64           |
//! | offsets    | (n + 1) × u64 |
//! | neighbors  | 2·edge_count × u32 |
//!
//! The sampling probability is not stored.

use std::io::{BufReader, BufWriter, Read, Write};

use super::{Graph, GraphError};

pub const GRAPH_MAGIC: [u8; 8] = *b"MDGRAPH\0";
pub const GRAPH_FORMAT_VERSION: u32 = 1;

pub fn write_binary<W: Write>(g: &Graph, out: W) -> Result<(), GraphError> {
    let mut out = BufWriter::new(out);
    out.write_all(&GRAPH_MAGIC)?;
    out.write_all(&GRAPH_FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    out.write_all(&(g.edge_count() as u64).to_le_bytes())?;
    for &o in g.offsets() {
        out.write_all(&(o as u64).to_le_bytes())?;
    }
    for &v in g.neighbor_array() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a dump written by [`write_binary`] and re-validates the structure.
pub fn read_binary<R: Read>(input: R) -> Result<Graph, GraphError> {
    let mut input = BufReader::new(input);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if magic != GRAPH_MAGIC {
        return Err(GraphError::Malformed("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != GRAPH_FORMAT_VERSION {
        return Err(GraphError::Malformed(format!("unsupported version {version}")));
    }
    let n = usize::try_from(read_u64(&mut input)?).map_err(|_| GraphError::Malformed("n overflows".into()))?;
    let m = usize::try_from(read_u64(&mut input)?).map_err(|_| GraphError::Malformed("edge count overflows".into()))?;
    if n == 0 || n > u32::MAX as usize {
        return Err(GraphError::Malformed(format!("vertex count {n}")));
    }
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let o = usize::try_from(read_u64(&mut input)?).map_err(|_| GraphError::Malformed("offset overflows".into()))?;
        offsets.push(o);
    }
    if offsets[n] != 2 * m {
        return Err(GraphError::Malformed("offsets disagree with edge count".into()));
    }
    let mut neighbors = Vec::with_capacity(2 * m);
    for _ in 0..2 * m {
        neighbors.push(read_u32(&mut input)?);
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(GraphError::Malformed("trailing bytes".into()));
    }
    Graph::from_csr(n, offsets, neighbors)
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_gnp;

    #[test]
    fn round_trip() {
        let g = sample_gnp(500, 0.02, 11).unwrap();
        let mut buf = Vec::new();
        write_binary(&g, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 + 8 + 8 * 501 + 4 * 2 * g.edge_count());
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.offsets(), g.offsets());
        assert_eq!(back.neighbor_array(), g.neighbor_array());
        assert_eq!(back.p(), None);
    }

    #[test]
    fn header_layout() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let mut buf = Vec::new();
        write_binary(&g, &mut buf).unwrap();
        let expected: Vec<u8> = [
            &b"MDGRAPH\0"[..],
            &1u32.to_le_bytes(),
            &2u64.to_le_bytes(),
            &1u64.to_le_bytes(),
            &0u64.to_le_bytes(),
            &1u64.to_le_bytes(),
            &2u64.to_le_bytes(),
            &1u32.to_le_bytes(),
            &0u32.to_le_bytes(),
        ]
        .concat();
        assert_eq!(buf, expected);
    }

    #[test]
    fn rejects_corruption() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut buf = Vec::new();
        write_binary(&g, &mut buf).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_binary(bad.as_slice()), Err(GraphError::Malformed(_))));

        let mut bad = buf.clone();
        bad.push(0);
        assert!(matches!(read_binary(bad.as_slice()), Err(GraphError::Malformed(_))));

        let truncated = &buf[..buf.len() - 2];
        assert!(matches!(read_binary(truncated), Err(GraphError::Io(_))));

        // Break symmetry: the last neighbor of vertex 2 points at 0 instead of 1.
        let mut bad = buf.clone();
        let last = bad.len() - 4;
        bad[last..].copy_from_slice(&0u32.to_le_bytes());
        assert!(read_binary(bad.as_slice()).is_err());
    }
}
