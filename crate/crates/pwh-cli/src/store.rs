//! Synopsis files on disk: the binary format plus a JSON schema sidecar.
//!
//! The binary format carries bin structure and byte depths but not column
//! names, kinds, or encodings, so `save` writes `<path>.schema.json` next to
//! the synopsis and `load` overlays it when present. Without the sidecar the
//! columns come back as anonymous integers, which still answers positional
//! queries.

use anyhow::{bail, Context, Result};
use pwh_core::storage::{deserialize, serialize};
use pwh_core::{ColumnSpec, Synopsis};
use std::fs;
use std::path::{Path, PathBuf};

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".schema.json");
    name.into()
}

pub fn save(path: &Path, syn: &Synopsis) -> Result<()> {
    let bytes = serialize(syn).context("serializing the synopsis")?;
    fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
    let sidecar = sidecar_path(path);
    let json = serde_json::to_vec_pretty(&syn.columns)?;
    fs::write(&sidecar, json).with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Synopsis> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut syn = deserialize(&bytes).with_context(|| format!("loading {}", path.display()))?;
    let sidecar = sidecar_path(path);
    if sidecar.exists() {
        let specs: Vec<ColumnSpec> = serde_json::from_slice(
            &fs::read(&sidecar).with_context(|| format!("reading {}", sidecar.display()))?,
        )
        .with_context(|| format!("parsing {}", sidecar.display()))?;
        if specs.len() != syn.columns.len() {
            bail!(
                "{}: {} columns where the synopsis has {}",
                sidecar.display(),
                specs.len(),
                syn.columns.len()
            );
        }
        for (from_file, from_sidecar) in syn.columns.iter().zip(&specs) {
            if from_file.byte_depth != from_sidecar.byte_depth {
                bail!(
                    "{}: byte depth mismatch on column {}",
                    sidecar.display(),
                    from_sidecar.name
                );
            }
        }
        syn.columns = specs;
    }
    Ok(syn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pwh_core::construct::build_pairwise_hist;
    use pwh_core::{ColumnKind, EncodedTable, Params};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synopsis() -> Synopsis {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = ColumnSpec {
            column_id: 0,
            name: "speed".into(),
            kind: ColumnKind::Decimal,
            offset: 10,
            scale: 10,
            category_ranks: vec![],
            null_code: None,
            byte_depth: 2,
        };
        let table = EncodedTable {
            specs: vec![spec],
            columns: vec![(0..600).map(|_| rng.gen_range(0..900)).collect()],
        };
        let params = Params::new(600, 600, 6, 0.001, 1).unwrap();
        build_pairwise_hist(&table, &params, None, 1).unwrap()
    }

    #[test]
    fn the_sidecar_restores_names_kinds_and_encodings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pwh");
        let syn = synopsis();
        save(&path, &syn).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.columns, syn.columns);
        assert_eq!(back.hists_1d, syn.hists_1d);
    }

    #[test]
    fn loading_without_a_sidecar_falls_back_to_positional_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pwh");
        let syn = synopsis();
        save(&path, &syn).unwrap();
        fs::remove_file(sidecar_path(&path)).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.columns[0].name, "col0");
        assert_eq!(back.columns[0].kind, ColumnKind::Integer);
        assert_eq!(back.hists_1d, syn.hists_1d);
    }
}
