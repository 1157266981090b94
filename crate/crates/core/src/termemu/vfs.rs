use std::collections::BTreeMap;

use crate::seed::mix64;

/// In-memory file system: path to bytes, paths kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vfs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Vfs {
    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains_key(path)
    }

    /// Returns `true` when the path is new.
    pub fn write(&mut self, path: &str, content: Vec<u8>) -> bool {
        self.files.insert(path.to_string(), content).is_none()
    }

    pub fn remove(&mut self, path: &str) -> Option<Vec<u8>> {
        self.files.remove(path)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u8])> {
        self.files.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Order-sensitive hash of paths and contents.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0u64;
        for (k, v) in &self.files {
            for &b in k.as_bytes().iter().chain([0u8].iter()).chain(v.iter()) {
                h = mix64(h ^ b as u64);
            }
        }
        h
    }
}

/// One row of the file browser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEntry {
    pub depth: usize,
    pub name: String,
    /// Full path for files and directories (without trailing slash).
    pub path: String,
    pub is_dir: bool,
}

/// Flattens the sorted path set into browser rows with synthesized
/// directory entries.
pub fn tree_entries(vfs: &Vfs) -> Vec<TreeEntry> {
    let mut out = Vec::new();
    let mut open_dirs: Vec<&str> = Vec::new();
    for path in vfs.paths() {
        let comps: Vec<&str> = path.split('/').collect();
        let (dirs, file) = comps.split_at(comps.len() - 1);
        let common = open_dirs
            .iter()
            .zip(dirs.iter())
            .take_while(|(a, b)| a == b)
            .count();
        open_dirs.truncate(common);
        for (depth, d) in dirs.iter().enumerate().skip(common) {
            open_dirs.push(d);
            out.push(TreeEntry {
                depth,
                name: d.to_string(),
                path: comps[..=depth].join("/"),
                is_dir: true,
            });
        }
        out.push(TreeEntry {
            depth: dirs.len(),
            name: file[0].to_string(),
            path: path.to_string(),
            is_dir: false,
        });
    }
    out
}
