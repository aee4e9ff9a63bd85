//! On-disk subnetwork cache.
//!
//! ```text
//! <dir>/nodes.tsv
//! <dir>/keywords.tsv
//! <dir>/subnets/00000.subnet ...   (one per keyword, sorted keyword order)
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use relflow::subnet::{Subnetwork, SubnetworkSet};
use relflow::webgraph::{KeywordIndex, UrlTable};

const NODES: &str = "nodes.tsv";
const KEYWORDS: &str = "keywords.tsv";
const SUBNETS: &str = "subnets";
const EXT: &str = "subnet";

/// Everything `score` and `rank` need.
pub struct Cache {
    pub urls: UrlTable,
    pub keywords: KeywordIndex,
    pub subnets: SubnetworkSet,
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn subnet_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(SUBNETS).join(format!("{index:05}.{EXT}"))
}

pub fn store(dir: &Path, urls: &UrlTable, keywords: &KeywordIndex, subnets: &SubnetworkSet) -> Result<()> {
    let sub_dir = dir.join(SUBNETS);
    fs::create_dir_all(&sub_dir).with_context(|| format!("creating {}", sub_dir.display()))?;
    let mut written = Vec::with_capacity(subnets.len());
    for (i, net) in subnets.values().enumerate() {
        let path = subnet_path(dir, i);
        write_atomic(&path, &net.to_text())?;
        written.push(path);
    }
    // leftovers from an earlier build with more keywords
    for entry in fs::read_dir(&sub_dir).with_context(|| format!("listing {}", sub_dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == EXT) && !written.contains(&path) {
            fs::remove_file(&path).with_context(|| format!("removing stale {}", path.display()))?;
        }
    }
    write_atomic(&dir.join(KEYWORDS), &keywords.to_text())?;
    write_atomic(&dir.join(NODES), &urls.to_text())?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load(dir: &Path) -> Result<Cache> {
    let nodes_path = dir.join(NODES);
    let urls = UrlTable::parse(&read(&nodes_path)?, &nodes_path.display().to_string())?;
    let kw_path = dir.join(KEYWORDS);
    let keywords = KeywordIndex::parse(&read(&kw_path)?, &kw_path.display().to_string(), urls.len())?;
    let sub_dir = dir.join(SUBNETS);
    let mut paths: Vec<PathBuf> = fs::read_dir(&sub_dir)
        .with_context(|| format!("listing {}", sub_dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == EXT));
    paths.sort();
    let mut subnets = SubnetworkSet::new();
    for path in paths {
        let net = Subnetwork::parse(&read(&path)?, &path.display().to_string())?;
        if let Some(bad) = net.pages().iter().find(|p| p.index() >= urls.len()) {
            bail!("{}: page {bad} is not in {NODES}", path.display());
        }
        if subnets.insert(net.keyword().to_string(), net).is_some() {
            bail!("{}: keyword cached twice", path.display());
        }
    }
    if let Some(w) = keywords.keywords().find(|w| !subnets.contains_key(*w)) {
        bail!(
            "cache in {} has no subnetwork for keyword `{w}`; rerun `relflow build`",
            dir.display()
        );
    }
    Ok(Cache {
        urls,
        keywords,
        subnets,
    })
}
