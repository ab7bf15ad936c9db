#!/usr/bin/env python3
"""Regenerate the deterministic fixture set under fixtures/.

The fixtures form a closed desk-scale world in which every pipeline stage
has a known-good outcome:

* vectors.txt      word vectors where each class's signature nouns sit in
                   tight two-word clusters with a near-synonym that belongs
                   to the NEXT class on an 18-class ring. Swapping signature
                   words for their cluster partners is therefore both
                   meaning-preserving (high cosine) and class-flipping for
                   a classifier trained on the paraphrase corpus.
* corpus.csv       30 unique paraphrases per class (540 rows) built from
                   shared sentence skeletons plus per-class signal words.
* originals.csv    18 attack descriptions (one per class), each carrying
                   its three signature words: the attack targets.
* kb_source.json   the originals plus two device specs, KB build input.
* verdicts_reference.csv  a fixed judge-score table whose per-dataset
                   means and deltas are exact decimal values.
* dataset_map.json, traffic_snapshot.json, traffic.csv, label_map.json,
  config.json      supporting inputs for the CLI pipeline.

Everything is seeded; re-running this script is byte-identical. The script
ends with a self-check that loads the written files through the library
and asserts the geometric and statistical properties the fixtures promise.
"""

from __future__ import annotations

import csv
import json
import random
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

DIM = 96
NOISE = 0.04
VECTOR_SEED = 96

# Ring order. Each class lists its signature nouns (s), the near-synonyms
# it donates to the next class (the next class's t-words), and two extra
# lexical markers that appear in text but never in the vector store.
# RING[i] = (class name, s-words, extras); T_WORDS[i] = synonyms of
# RING[i-1]'s s-words, appearing only in class i's paraphrases.
RING: list[tuple[str, tuple[str, str, str], tuple[str, str]]] = [
    ("Port Scanning", ("sweep", "probes", "listeners"), ("reconnaissance", "openings")),
    ("Vulnerability Scanning", ("audit", "flaws", "scanner"), ("assessment", "exposures")),
    ("OS Scanning", ("fingerprint", "stack", "platform"), ("kernel", "banners")),
    ("TCP SYN Flood", ("handshake", "backlog", "floods"), ("acknowledgments", "synchronization")),
    ("TCP Flood", ("sessions", "torrent", "sockets"), ("connections", "exhaustion")),
    ("SYN Flood", ("surge", "queue", "requests"), ("timeouts", "half-open")),
    ("UDP Flood", ("datagrams", "barrage", "bandwidth"), ("amplification", "jitter")),
    ("ICMP Flood", ("echoes", "pings", "saturation"), ("diagnostics", "volleys")),
    ("HTTP Flood", ("workers", "swarm", "webserver"), ("urls", "verbs")),
    ("DNS Spoofing", ("resolver", "forgery", "domains"), ("records", "zones")),
    ("ARP Spoofing", ("cache", "broadcasts", "impostor"), ("segments", "adapters")),
    ("MITM", ("interception", "relay", "eavesdropper"), ("pathways", "certificates")),
    ("Dictionary Brute Force", ("wordlist", "guesses", "lockout"), ("passwords", "logins")),
    ("Password Cracking", ("hashes", "credentials", "cracker"), ("vaults", "entropy")),
    ("Backdoor", ("implant", "persistence", "channel"), ("triggers", "shells")),
    ("Uploading", ("payloads", "transfer", "webshell"), ("artifacts", "directories")),
    ("SQL Injection", ("queries", "database", "statements"), ("schemas", "commands")),
    ("Cross-Site Scripting", ("scripts", "browser", "injection"), ("cookies", "forms")),
]

T_WORDS: list[tuple[str, str, str]] = [
    ("snippets", "client", "insertion"),          # from Cross-Site Scripting
    ("survey", "tests", "daemons"),               # from Port Scanning
    ("review", "weaknesses", "analyzer"),         # from Vulnerability Scanning
    ("signature", "layers", "machines"),          # from OS Scanning
    ("negotiation", "buffers", "deluge"),         # from TCP SYN Flood
    ("dialogues", "cascade", "descriptors"),      # from TCP Flood
    ("spike", "pipeline", "demands"),             # from SYN Flood
    ("frames", "bombardment", "throughput"),      # from UDP Flood
    ("replies", "heartbeats", "congestion"),      # from ICMP Flood
    ("threads", "horde", "website"),              # from HTTP Flood
    ("lookup", "fabrication", "hostnames"),       # from DNS Spoofing
    ("tables", "announcements", "masquerader"),   # from ARP Spoofing
    ("capture", "proxy", "snooper"),              # from MITM
    ("dictionary", "attempts", "throttle"),       # from Dictionary Brute Force
    ("digests", "secrets", "solver"),             # from Password Cracking
    ("beacon", "foothold", "conduit"),            # from Backdoor
    ("bundles", "upload", "dropper"),             # from Uploading
    ("lookups", "datastore", "clauses"),          # from SQL Injection
]

ANCHORS = ("network", "traffic", "device", "packets", "service", "remote", "targets", "volume")
DEVICE_WORDS = ("processor", "memory", "storage", "firmware", "gigabit", "interface")

ORIGINALS: dict[str, str] = {
    "Port Scanning": (
        "Attackers run a methodical sweep across the device, sending probes to "
        "uncover listeners and openings exposed by the remote service."
    ),
    "Vulnerability Scanning": (
        "An automated scanner performs a hostile audit of the device, cataloguing "
        "flaws and exposures in every service reachable across the network."
    ),
    "OS Scanning": (
        "The intruder builds a fingerprint of the victim platform by teasing its "
        "network stack, matching kernel banners against traffic from known systems."
    ),
    "TCP SYN Flood": (
        "By abandoning every handshake midway, the adversary floods the port "
        "backlog with synchronization packets that never earn acknowledgments "
        "from the device."
    ),
    "TCP Flood": (
        "A relentless torrent of forged sessions keeps all sockets engaged, "
        "driving the device toward exhaustion as new connections stall across "
        "the network."
    ),
    "SYN Flood": (
        "The attacker sends a surge of half-open requests that jam the pending "
        "queue, forcing timeouts while legitimate traffic waits on the service."
    ),
    "UDP Flood": (
        "An unbroken barrage of oversized datagrams devours the available "
        "bandwidth, adding jitter to every exchange and starving the device of "
        "usable traffic."
    ),
    "ICMP Flood": (
        "Endless volleys of crafted pings bounce useless echoes off the target, "
        "pushing link saturation until genuine diagnostics cannot reach the "
        "device across the network."
    ),
    "HTTP Flood": (
        "A rented swarm of automated workers hammers the webserver with pointless "
        "urls and verbs, exhausting handlers meant for genuine traffic on the "
        "service."
    ),
    "DNS Spoofing": (
        "Poisoned answers from a rogue resolver rewrite trusted domains, planting "
        "forgery inside cached records so victims visit attacker-controlled zones "
        "instead of the real service."
    ),
    "ARP Spoofing": (
        "Gratuitous broadcasts rewrite the address cache of nearby adapters, "
        "letting an impostor claim traffic meant for other segments of the "
        "network."
    ),
    "MITM": (
        "Seated quietly between two endpoints, the eavesdropper performs live "
        "interception, running a relay that swaps certificates along trusted "
        "pathways of the network."
    ),
    "Dictionary Brute Force": (
        "Armed with a huge wordlist, the intruder fires rapid guesses at exposed "
        "logins, pacing each attempt to dodge the lockout policy on the device."
    ),
    "Password Cracking": (
        "After lifting stolen hashes from the device, the cracker grinds through "
        "candidate credentials offline, betting that weak entropy will crack open "
        "user vaults."
    ),
    "Backdoor": (
        "A hidden implant grants the intruder persistence long after the breach, "
        "opening a covert channel that triggers remote access on demand."
    ),
    "Uploading": (
        "Abusing a careless transfer endpoint, the attacker plants hostile "
        "payloads in writable directories, then browses to the webshell to "
        "command the device."
    ),
    "SQL Injection": (
        "Malformed input smuggles extra statements into routine queries, letting "
        "the attacker read private schemas and rewrite the database behind the "
        "service."
    ),
    "Cross-Site Scripting": (
        "Through careless form handling, the page reflects hostile scripts into "
        "every visiting browser, an injection that quietly steals cookies bound "
        "for the remote service."
    ),
}

DEVICES: dict[str, str] = {
    "Raspberry Pi 4": (
        "Raspberry Pi 4 edge gateway: quad-core processor, 4 GB memory, 32 GB "
        "flash storage, one gigabit interface, vendor firmware refreshed "
        "quarterly, deployed as the site telemetry collector."
    ),
    "Modbus PLC": (
        "Modbus programmable logic controller: dual-core processor, 512 MB "
        "memory, 4 GB industrial storage, serial plus gigabit interface, locked "
        "firmware image, supervising pump and valve actuators."
    ),
}

# Sentence skeletons shared by every class. {c*} slots take signal words,
# {a*} slots take anchors; the fixed filler never collides with any signal
# word, so only the slot words separate the classes.
SKELETONS: list[str] = [
    "Monitoring dashboards flag recurring {c1} activity, where {c2} and {c3} accumulate across the {a1} while operators watch the {a2}.",
    "The campaign pushes {c1} through the {a1}, combining {c2} with {c3} and {c4} until the {a2} buckles.",
    "Defenders reported {c1} and {c2} hitting the {a1} in waves, followed by {c3} aimed at exposed {a2}.",
    "Recent {a1} inspection reveals {c1} mixed with {c2}, suggesting {c3} staged from a compromised host near the {a2}.",
    "A steady stream of {c1} accompanies {c2}, and the resulting {c3} wears down the {a1} behind the {a2}.",
    "Incident notes describe {c1} escalating into {c2}, with {c3} and {c4} recorded on every affected {a1}.",
    "The intrusion leans on {c1} to seed {c2}, after which {c3} overwhelms the {a1} and the {a2}.",
    "Forensic timelines tie {c1} to {c2}, and correlated {c3} appears throughout the {a1} history.",
    "Operators noticed {c1} shortly before {c2}, while {c3} kept steady pressure on the {a1} and its {a2}.",
    "Repeated {c1} blends with {c2} in collected {a1}, masking {c3} and {c4} directed at the {a2}.",
]

# Per-skeleton content-slot counts derived from the templates above.
SLOT_COUNTS = [3, 4, 3, 3, 3, 4, 3, 3, 3, 4]

# (s, t, extra) draw counts for 3-slot and 4-slot skeletons.
MIXES_3 = [(2, 1, 0), (2, 0, 1), (2, 1, 0), (2, 1, 0)]
MIXES_4 = [(3, 1, 0), (2, 2, 0), (2, 1, 1), (2, 2, 0)]

PARAPHRASE_SEED = 1000
VARIANTS_PER_CLASS = 30


def _tokens(text: str) -> list[str]:
    import re

    return [m.group(0).lower() for m in re.finditer(r"[^\W_]+(?:['\-][^\W_]+)*", text)]


def cluster_assignments() -> tuple[dict[str, int], int]:
    """Map every vector-store token to its center index; return token->center, n_centers."""
    assignment: dict[str, int] = {}
    n = len(RING)
    for i in range(n):
        _, s_words, _ = RING[i]
        partner = T_WORDS[(i + 1) % n]
        for j in range(3):
            center = 3 * i + j
            for token in (s_words[j], partner[j]):
                if token in assignment:
                    raise SystemExit(f"token {token!r} assigned twice")
                assignment[token] = center
    next_center = 3 * n
    for token in ANCHORS + DEVICE_WORDS:
        if token in assignment:
            raise SystemExit(f"loner token {token!r} collides with a cluster token")
        assignment[token] = next_center
        next_center += 1
    return assignment, next_center


def write_vectors(path: Path) -> None:
    assignment, n_centers = cluster_assignments()
    if n_centers > DIM:
        raise SystemExit("more centers than dimensions; orthogonality lost")
    rng = np.random.default_rng(VECTOR_SEED)
    rows: list[str] = []
    for token in sorted(assignment):
        center = np.zeros(DIM)
        center[assignment[token]] = 1.0
        vec = center + NOISE * rng.standard_normal(DIM)
        vec /= np.linalg.norm(vec)
        rows.append(token + " " + " ".join(f"{x:.6f}" for x in vec))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_originals(path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["text", "label", "origin"])
        for name, _, _ in RING:
            writer.writerow([ORIGINALS[name], name, "original"])


def build_paraphrases() -> list[tuple[str, str]]:
    """30 unique skeleton-based paraphrases per class, ring order."""
    rows: list[tuple[str, str]] = []
    for index, (name, s_words, extras) in enumerate(RING):
        rng = random.Random(PARAPHRASE_SEED + index)
        t_words = T_WORDS[index]
        seen: set[str] = set()
        written = 0
        while written < VARIANTS_PER_CLASS:
            skeleton_id = rng.randrange(len(SKELETONS))
            skeleton = SKELETONS[skeleton_id]
            slots = SLOT_COUNTS[skeleton_id]
            mixes = MIXES_3 if slots == 3 else MIXES_4
            n_s, n_t, n_e = mixes[rng.randrange(len(mixes))]
            words = rng.sample(s_words, n_s) + rng.sample(t_words, n_t) + rng.sample(extras, n_e)
            rng.shuffle(words)
            anchors = rng.sample(ANCHORS, 2)
            fields = {f"c{k + 1}": words[k] for k in range(slots)}
            fields.update({"a1": anchors[0], "a2": anchors[1]})
            text = skeleton.format(**fields)
            if text in seen:
                continue
            seen.add(text)
            rows.append((text, name))
            written += 1
    return rows


def write_corpus(path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["text", "label", "origin"])
        for text, label in build_paraphrases():
            writer.writerow([text, label, "paraphrase"])


def write_kb_source(path: Path) -> None:
    payload = {
        "descriptions": [
            {"label": name, "text": ORIGINALS[name]} for name, _, _ in RING
        ],
        "devices": DEVICES,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_label_map(path: Path) -> None:
    sys.path.insert(0, str(ROOT / "src"))
    from ragvenom import corpus as corpus_mod

    entries = {name: name for name in corpus_mod.CANONICAL_CLASSES}
    entries.update(corpus_mod._DEFAULT_ALIASES)
    path.write_text(json.dumps(entries, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# Judge score tables. Totals are exact decimals chosen so that per-dataset
# means and pre/post deltas land on exact two-decimal values; components
# fill caps greedily (3, 3, 2, then remainder in clarity).
JUDGES = (
    "claude-sonnet-4.5",
    "deepseek-v3.2",
    "falcon-h1-34b",
    "gemini-2.5-flash",
    "gpt5-instant",
    "grok-4",
    "llama-4",
    "mixtral-8x7b",
)
HUMAN_JUDGE = "human:expert-panel"

VERDICT_TOTALS: dict[str, dict[str, tuple[float, float]]] = {
    "edgeiiot-avg": {
        "gemini-2.5-flash": (10.0, 9.35),
        "llama-4": (10.0, 9.10),
        "falcon-h1-34b": (10.0, 8.23),
        "gpt5-instant": (9.85, 9.60),
        "mixtral-8x7b": (9.80, 9.46),
        "deepseek-v3.2": (9.75, 9.40),
        "grok-4": (9.75, 9.25),
        "claude-sonnet-4.5": (9.65, 9.45),
        HUMAN_JUDGE: (9.73, 8.69),
    },
    "ciciot-avg": {
        "deepseek-v3.2": (10.0, 8.80),
        "gemini-2.5-flash": (10.0, 8.70),
        "llama-4": (10.0, 8.51),
        "falcon-h1-34b": (10.0, 8.00),
        "gpt5-instant": (9.50, 8.90),
        "claude-sonnet-4.5": (9.40, 8.85),
        "grok-4": (9.35, 8.65),
        "mixtral-8x7b": (9.27, 8.55),
        HUMAN_JUDGE: (9.67, 8.43),
    },
}

DATASET_MAP = {"edgeiiot-avg": "edge-iiotset", "ciciot-avg": "cic-iot-2023"}

# Expected aggregate values implied by the tables above.
EXPECTED_MEANS = {
    "edge-iiotset": {"judges": (9.85, 9.23, 0.62), "human": (9.73, 8.69, 1.04)},
    "cic-iot-2023": {"judges": (9.69, 8.62, 1.07), "human": (9.67, 8.43, 1.24)},
}


def _components(total: float) -> tuple[float, float, float, float]:
    total = round(total, 2)
    analysis = min(3.0, total)
    mitigation = min(3.0, total - analysis)
    depth = min(2.0, total - analysis - mitigation)
    clarity = round(total - analysis - mitigation - depth, 2)
    return analysis, mitigation, depth, clarity


def write_verdicts(path: Path, map_path: Path) -> None:
    sys.path.insert(0, str(ROOT / "src"))
    from ragvenom.evaluation import JudgeVerdict, RubricScore, save_verdicts_csv

    verdicts = []
    for scenario_id in ("edgeiiot-avg", "ciciot-avg"):
        table = VERDICT_TOTALS[scenario_id]
        for judge_id in list(JUDGES) + [HUMAN_JUDGE]:
            pre_total, post_total = table[judge_id]
            note = "Averaged rubric scores across all scenario runs for this source."
            pre = RubricScore(*_components(pre_total), justification=note)
            post = RubricScore(*_components(post_total), justification=note)
            verdicts.append(JudgeVerdict(judge_id, scenario_id, pre, post))
    save_verdicts_csv(verdicts, path)
    map_path.write_text(json.dumps(DATASET_MAP, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_traffic(csv_path: Path, snapshot_path: Path) -> None:
    rng = random.Random(7)
    rows: list[tuple[str, str, str, str]] = []
    for _ in range(45):
        rate = rng.gauss(40.0, 8.0)
        size = rng.gauss(520.0, 60.0)
        proto = "tcp" if rng.random() < 0.7 else "udp"
        rows.append((f"{rate:.3f}", f"{size:.3f}", proto, "benign"))
    for _ in range(45):
        rate = rng.gauss(900.0, 120.0)
        size = rng.gauss(96.0, 14.0)
        proto = "udp" if rng.random() < 0.6 else "icmp"
        rows.append((f"{rate:.3f}", f"{size:.3f}", proto, "flood"))
    rng.shuffle(rows)
    # Inject a few missing feature cells and two exact duplicates.
    rows[3] = ("", rows[3][1], rows[3][2], rows[3][3])
    rows[11] = (rows[11][0], "", rows[11][2], rows[11][3])
    rows[27] = (rows[27][0], rows[27][1], "", rows[27][3])
    rows.append(rows[5])
    rows.append(rows[40])
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fwd_rate", "mean_size", "proto", "label"])
        writer.writerows(rows)
    snapshot = {
        "dst_port": 502,
        "flow_duration_ms": 4821,
        "fwd_packets_per_s": 9421.7,
        "mean_packet_size": 98.4,
        "syn_flag_count": 312,
        "protocol": "udp",
    }
    snapshot_path.write_text(json.dumps(snapshot, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_config(path: Path) -> None:
    config = {
        "seed": 42,
        "llm_mode": "mock",
        "output_dir": "out",
        "paths": {
            "vectors": "fixtures/vectors.txt",
            "kb_file": "out/kb.json",
        },
        "surrogate": {"epochs": 500, "learning_rate": 0.5, "l2": 0.0001, "split_ratio": 0.8},
        "attack": {
            "sentence_sim_threshold": 0.7,
            "word_sim_threshold": 0.5,
            "max_candidates": 50,
            "max_perturb_fraction": 0.4,
        },
        "detector": {"n_trees": 60},
        "prompts": {
            "response_requirements": [
                "Identify the attack and explain the mechanism behind the observed traffic.",
                "Assess the likely impact on the affected device.",
                "Recommend concrete mitigations appropriate to the device.",
            ]
        },
    }
    path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def self_check() -> None:
    sys.path.insert(0, str(ROOT / "src"))
    from ragvenom import attacker, corpus, evaluation, knowledge_base, lexsem, surrogate

    store = lexsem.load_vectors(FIXTURES / "vectors.txt")
    matrix = store.matrix
    tokens = list(store.tokens)
    assert store.dim == DIM
    assert len(tokens) == len(set(tokens)) == 122

    assignment, _ = cluster_assignments()
    index = {token: i for i, token in enumerate(tokens)}
    gram = matrix @ matrix.T
    for a, i in index.items():
        for b, j in index.items():
            if j <= i:
                continue
            same = assignment[a] == assignment[b]
            cos = gram[i, j]
            if same:
                assert cos >= 0.80, f"cluster pair {a}/{b} cos {cos:.3f} too low"
            else:
                assert cos < 0.45, f"cross pair {a}/{b} cos {cos:.3f} too high"

    stopwords = lexsem.default_stopwords()
    signal_owner: dict[str, str] = {}
    for idx, (name, s_words, extras) in enumerate(RING):
        for w in s_words + T_WORDS[idx] + extras:
            assert w not in stopwords, f"signal word {w!r} is a stopword"
            assert w not in signal_owner, f"signal word {w!r} reused across classes"
            signal_owner[w] = name
    for extra in [e for _, _, ex in RING for e in ex]:
        assert extra not in store, f"extra {extra!r} must stay out of the vector store"

    originals = corpus.load_corpus_csv(FIXTURES / "originals.csv")
    assert len(originals) == 18
    for record, (name, s_words, extras) in zip(originals, RING):
        toks = _tokens(record.text)
        assert record.cls.name == name
        assert 19 <= len(toks) <= 26, f"{name}: {len(toks)} tokens"
        for w in s_words:
            assert toks.count(w) == 1, f"{name}: signature {w!r} count != 1"
        assert any(e in toks for e in extras), f"{name}: no extra marker"
        foreign = [w for w in toks if w in signal_owner and signal_owner[w] != name]
        assert not foreign, f"{name}: foreign signal words {foreign}"
        # Cluster partners must agree on POS in context, else swaps are vetoed.
        ring_index = [r[0] for r in RING].index(name)
        partners = T_WORDS[(ring_index + 1) % len(RING)]
        base_tags = lexsem.pos_tag(toks)
        for w, partner in zip(s_words, partners):
            pos = toks.index(w)
            swapped = list(toks)
            swapped[pos] = partner
            assert lexsem.pos_tag(swapped)[pos] == base_tags[pos], f"{w}->{partner} changes POS"

    records = corpus.load_corpus_csv(FIXTURES / "corpus.csv")
    assert len(records) == 540
    per_class: dict[str, list[str]] = {}
    for record in records:
        per_class.setdefault(record.cls.name, []).append(record.text)
    assert len(per_class) == 18
    for (name, s_words, extras), t_words in zip(RING, T_WORDS):
        texts = per_class[name]
        assert len(texts) == len(set(texts)) == VARIANTS_PER_CLASS
        allowed = set(s_words) | set(t_words) | set(extras)
        for text in texts:
            toks = _tokens(text)
            bad = [w for w in toks if w in signal_owner and w not in allowed]
            assert not bad, f"{name} paraphrase leaks foreign signal words {bad}"
            assert sum(1 for w in toks if w in s_words) >= 2

    split = corpus.split_shuffled(records, ratio=0.8, seed=42)
    assert all(len([r for r in split.test if r.cls.name == name]) == 6 for name in per_class)
    model = surrogate.fit(split.train)
    report = surrogate.classification_report(model, split.test)
    macro_f1 = report["macro"]["f1"]
    assert macro_f1 >= 0.92, f"held-out macro F1 {macro_f1:.4f} below fixture promise"

    config = attacker.AttackConfig()
    rewrites = attacker.attack_all(model, store, config, originals)
    assert not any(r.skipped for r in rewrites), "surrogate must label every original correctly"
    successes = [r for r in rewrites if r.success]
    assert len(successes) >= 16, f"only {len(successes)}/18 attacks succeed"
    assert any(len(r.substitutions) <= 8 for r in successes)
    for rewrite in rewrites:
        problems = attacker.check_rewrite(rewrite, model, store, config)
        assert not problems, f"{rewrite.cls.name}: {problems}"

    source = json.loads((FIXTURES / "kb_source.json").read_text(encoding="utf-8"))
    descriptions = [
        corpus.DescriptionRecord(corpus.AttackClass(d["label"]), d["text"], origin="original")
        for d in source["descriptions"]
    ]
    kb = knowledge_base.build_kb(descriptions, source["devices"], store)
    assert len(kb.entries) == 20

    verdicts = evaluation.load_verdicts_csv(FIXTURES / "verdicts_reference.csv")
    report = evaluation.aggregate(verdicts, DATASET_MAP)
    for dataset, expected in EXPECTED_MEANS.items():
        summary = report.datasets[dataset]
        for group, (pre, post, delta) in expected.items():
            prefix = "judges" if group == "judges" else "human"
            assert abs(summary[f"{prefix}_mean_pre"] - pre) < 1e-9, (dataset, group, "pre")
            assert abs(summary[f"{prefix}_mean_post"] - post) < 1e-9, (dataset, group, "post")
            assert abs(summary[f"{prefix}_delta"] - delta) < 1e-9, (dataset, group, "delta")

    print(f"self-check ok: macro F1 {macro_f1:.4f}, attack success {len(successes)}/18")


def main() -> int:
    FIXTURES.mkdir(exist_ok=True)
    write_vectors(FIXTURES / "vectors.txt")
    write_originals(FIXTURES / "originals.csv")
    write_corpus(FIXTURES / "corpus.csv")
    write_kb_source(FIXTURES / "kb_source.json")
    write_label_map(FIXTURES / "label_map.json")
    write_verdicts(FIXTURES / "verdicts_reference.csv", FIXTURES / "dataset_map.json")
    write_traffic(FIXTURES / "traffic.csv", FIXTURES / "traffic_snapshot.json")
    write_config(FIXTURES / "config.json")
    self_check()
    for name in sorted(p.name for p in FIXTURES.iterdir()):
        print("wrote", name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
