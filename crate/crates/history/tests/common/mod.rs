//! Git fixtures built with the `git` command line, and a tree reader that
//! does not go through libgit2.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

pub type Files = BTreeMap<String, Vec<u8>>;

pub fn git(dir: &Path, args: &[&str]) -> Vec<u8> {
    git_env(dir, args, &[])
}

pub fn git_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Vec<u8> {
    let out = Command::new("git")
        .args(args)
        .current_dir(dir)
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_AUTHOR_NAME", "Ada Author")
        .env("GIT_AUTHOR_EMAIL", "ada@example.org")
        .env("GIT_COMMITTER_NAME", "Cy Committer")
        .env("GIT_COMMITTER_EMAIL", "cy@example.org")
        .envs(env.iter().copied())
        .output()
        .expect("git is installed");
    assert!(
        out.status.success(),
        "git {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

pub fn git_text(dir: &Path, args: &[&str]) -> String {
    String::from_utf8(git(dir, args)).unwrap()
}

/// A work tree whose commits get fixed, increasing timestamps.
pub struct Fixture {
    pub dir: PathBuf,
    clock: i64,
}

impl Fixture {
    pub fn new(dir: &Path) -> Self {
        std::fs::create_dir_all(dir).unwrap();
        git(dir, &["init", "-q", "-b", "main"]);
        Fixture { dir: dir.to_path_buf(), clock: 1_400_000_000 }
    }

    pub fn write(&self, path: &str, content: &str) {
        let full = self.dir.join(path);
        std::fs::create_dir_all(full.parent().unwrap()).unwrap();
        std::fs::write(full, content).unwrap();
    }

    pub fn remove(&self, path: &str) {
        git(&self.dir, &["rm", "-q", path]);
    }

    fn dated(&mut self, args: &[&str]) -> String {
        self.clock += 86_400;
        let date = format!("{} +0000", self.clock);
        git_env(&self.dir, args, &[("GIT_AUTHOR_DATE", &date), ("GIT_COMMITTER_DATE", &date)]);
        self.head()
    }

    pub fn commit(&mut self, message: &str) -> String {
        git(&self.dir, &["add", "-A"]);
        self.dated(&["commit", "-q", "--allow-empty", "-m", message])
    }

    pub fn merge(&mut self, branch: &str, message: &str) -> String {
        self.dated(&["merge", "-q", "--no-ff", "-m", message, branch])
    }

    pub fn annotated_tag(&mut self, name: &str, message: &str) {
        self.dated(&["tag", "-a", name, "-m", message]);
    }

    pub fn head(&self) -> String {
        git_text(&self.dir, &["rev-parse", "HEAD"]).trim().to_string()
    }

    /// Seconds since the epoch of the last commit.
    pub fn now(&self) -> i64 {
        self.clock
    }
}

/// Every file of `rev`, read with `git ls-tree` and `git cat-file`.
pub fn read_tree(git_dir: &Path, rev: &str) -> Files {
    let listing = git(git_dir, &["ls-tree", "-r", "-z", rev]);
    let mut files = Files::new();
    for record in listing.split(|b| *b == 0).filter(|r| !r.is_empty()) {
        let record = std::str::from_utf8(record).unwrap();
        let (meta, path) = record.split_once('\t').unwrap();
        let oid = meta.split_whitespace().nth(2).unwrap();
        files.insert(path.to_string(), git(git_dir, &["cat-file", "blob", oid]));
    }
    files
}

/// `(commit, parents)` for every commit, in `rev-list --all` order.
pub fn topology(git_dir: &Path) -> Vec<Vec<String>> {
    git_text(git_dir, &["rev-list", "--all", "--parents", "--topo-order", "--reverse"])
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

/// Raw commit object without its tree and parent lines.
pub fn commit_metadata(git_dir: &Path, commit: &str) -> Vec<u8> {
    let raw = git(git_dir, &["cat-file", "commit", commit]);
    let mut out = Vec::new();
    for line in raw.split_inclusive(|b| *b == b'\n') {
        if !(line.starts_with(b"tree ") || line.starts_with(b"parent ")) {
            out.extend_from_slice(line);
        }
    }
    out
}

pub const HMAC_V1: &str = "package org.apache.commons.codec.digest;

import java.util.Arrays;

/** Simplifies common Mac tasks. */
public final class HmacUtils {

    private final byte[] key;

    public HmacUtils(byte[] key) {
        this.key = key;
    }

    /** Returns a Mac for the given key. */
    public byte[] hmac(String valueToDigest) {
        return valueToDigest.getBytes();
    }

    public String hmacHex(String valueToDigest) {
        return new String(hmac(valueToDigest));
    }

    public void updateHmac(byte[] valueToDigest) {
        Arrays.fill(valueToDigest, (byte) 0);
    }
}
";

pub const SOUNDEX_V1: &str = "package org.apache.commons.codec.language;

/** Encodes a string into a Soundex value. */
public class Soundex {

    private static final char[] US_ENGLISH_MAPPING = \"01230120022455012623010202\".toCharArray();

    public String encode(String str) {
        return soundex(str);
    }

    /** Retreives the Soundex code for a given string. */
    public String soundex(String str) {
        if (str == null) {
            return null;
        }
        char[] out = {'0', '0', '0', '0'};
        return new String(out);
    }

    private char getMappingCode(String str, int index) {
        char mappedChar = US_ENGLISH_MAPPING[str.charAt(index) - 'A'];
        return mappedChar;
    }
}
";

pub const REFINED_V1: &str = "package org.apache.commons.codec.language;

public class RefinedSoundex {
    public String encode(String str) {
        return str;
    }

    char getMappingCode(char c) {
        return c;
    }
}
";

/// Five commits: adds, edits, deletions and a merge, with a lightweight tag
/// `v1` on the second commit and an annotated tag `v2` on the merge.
pub struct History {
    pub fixture: Fixture,
    /// Commit ids in creation order.
    pub commits: Vec<String>,
}

pub fn five_commit_history(dir: &Path) -> History {
    let mut fx = Fixture::new(dir);
    let mut commits = Vec::new();

    fx.write("src/main/java/org/apache/commons/codec/digest/HmacUtils.java", HMAC_V1);
    fx.write("README.md", "codec\n");
    fx.write("src/main/java/org/apache/commons/codec/Broken.java", "class Broken { void f( { }\n");
    commits.push(fx.commit("Initial import"));

    fx.write(
        "src/main/java/org/apache/commons/codec/digest/HmacUtils.java",
        &HMAC_V1.replace("new String(hmac(valueToDigest))", "Hex.encodeHexString(hmac(valueToDigest))"),
    );
    fx.write("src/main/java/org/apache/commons/codec/language/Soundex.java", SOUNDEX_V1);
    commits.push(fx.commit("CODEC-221: HmacUtils.hmacHex encodes as hex\n\nSecond paragraph.\n"));
    git(&fx.dir, &["tag", "v1"]);

    git(&fx.dir, &["checkout", "-q", "-b", "feature"]);
    fx.write("src/main/java/org/apache/commons/codec/language/RefinedSoundex.java", REFINED_V1);
    fx.write(
        "src/main/java/org/apache/commons/codec/language/Soundex.java",
        &SOUNDEX_V1.replace("return mappedChar;", "if (mappedChar == 'H') {\n            return 0;\n        }\n        return mappedChar;"),
    );
    commits.push(fx.commit("Fix CODEC-199: HW rule in Soundex"));

    git(&fx.dir, &["checkout", "-q", "main"]);
    fx.remove("README.md");
    fx.write(
        "src/main/java/org/apache/commons/codec/digest/HmacUtils.java",
        &HMAC_V1
            .replace("new String(hmac(valueToDigest))", "Hex.encodeHexString(hmac(valueToDigest))")
            .replace("import java.util.Arrays;", "import java.util.Arrays;\nimport java.util.Objects;")
            .replace(
                "    public void updateHmac(byte[] valueToDigest) {\n        Arrays.fill(valueToDigest, (byte) 0);\n    }\n",
                "",
            ),
    );
    commits.push(fx.commit("Remove updateHmac, drop README"));

    commits.push(fx.merge("feature", "Merge branch 'feature'"));
    fx.annotated_tag("v2", "Release 2\n");
    History { fixture: fx, commits }
}
