"""Synthetic manuscript corpora for tests, demos and calibration.

Generates arXiv-flavoured plain-text papers with controllable signal: each
author has a topic vocabulary (content signal), a pool of favourite cited
surnames plus self-citations (reference signal), and papers are written in
one of three bibliography styles. The generator is intentionally
independent of the parsing code so it can serve as its test harness.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .disambig import AbstractEmbedding

TOPICS: dict[str, list[str]] = {
    "quantum": "entanglement qubits decoherence superconducting photonic hamiltonian unitary interferometer teleportation annealing qudits resonator cavity fidelity tomography squeezing".split(),
    "robotics": "manipulator actuator kinematics trajectory gripper odometry waypoint servoing compliance locomotion quadruped exoskeleton teleoperation slippage payload grasping".split(),
    "genomics": "transcriptome methylation polymerase nucleotide chromatin ribosome phenotype genotype sequencing amplicon proteomic epigenetic mutation alleles exons introns".split(),
    "astronomy": "exoplanet spectrograph photometry redshift quasar supernova interstellar magnitude occultation bolometric parallax nebula accretion pulsar coronagraph ephemeris".split(),
    "fluids": "turbulence vorticity boundary reynolds laminar cavitation buoyancy convection droplet viscosity shear entrainment wake plume stratified swirling".split(),
    "crypto": "ciphertext plaintext signature adversary encryption nonce handshake entropy protocol verifier prover homomorphic lattice padding oracle keystream".split(),
    "materials": "perovskite graphene dislocation annealed crystalline lattice bandgap doping substrate epitaxy nanowire ceramic alloys tensile hardness ductility".split(),
    "optimization": "gradient convexity constraint feasible subgradient simplex penalty regularizer saddle momentum stepsize descent duality projection epigraph smoothness".split(),
    "neuro": "synapse cortex dendrite plasticity neurons spiking axonal inhibition excitatory hippocampus receptor oscillation firing stimulus habituation astrocyte".split(),
    "linguistics": "phoneme morphology syntax semantics corpus lexical prosody inflection clitics diphthong grapheme pragmatics valency anaphora deixis etymology".split(),
    "climate": "aerosol albedo monsoon permafrost radiative troposphere anomaly oscillation precipitation feedback glacier carbon forcing humidity circulation melting".split(),
    "economics": "equilibrium elasticity auction welfare marginal incentive monopoly liquidity arbitrage consumption volatility hedging utility taxation tariff inflation".split(),
    "vision": "segmentation occlusion keypoint stereo disparity saliency detector tracking calibration homography texture foreground illumination panorama mosaicing deblurring".split(),
    "graphs": "adjacency spectral clique centrality isomorphism traversal bipartite chromatic expander subgraph matching treewidth laplacian percolation motifs community".split(),
    "acoustics": "reverberation waveform harmonics timbre resonance loudspeaker microphone spectrogram cochlear attenuation impedance diffraction sonar ultrasonic vibrato formant".split(),
    "security": "malware sandboxing exploit firmware telemetry obfuscation payload forensics honeypot intrusion backdoor container privilege rootkit attestation patching".split(),
}

COMMON_WORDS = (
    "propose method results analysis model training evaluation dataset approach "
    "experiments section baseline improves performance compare larger robust "
    "settings measure observe overall consistent strongly design framework "
    "general findings empirical demonstrate significant novel effective "
    "theoretical practical consider previous related following present table "
    "figure shows achieves state research study systems problem solution"
).split()

CITED_SURNAMES = (
    "abernathy blackwood cormack dunmore eversley fairbanks gainsford hathersage "
    "inglewood jarrell kingsley lockhart merriweather northcote oakhurst pemberton "
    "quillfeather ravenscroft silverton thackeray underhill vanterpool wexford "
    "yarborough zelinsky ashdown birchall crowhurst dovedale elmsworth"
).split()

# Four personal stylistic words per author: a weak content signal that
# separates authors sharing a topic.
SIGNATURE_WORDS = (
    "crisply lucidly beguiling vexingly doggedly nimbly starkly deftly "
    "breezily quaintly ruggedly placidly wryly keenly blithely sturdily "
    "archly genially tersely limpidly serenely bluntly vividly slyly "
    "gamely airily dourly primly staidly zestily heartily drolly "
    "meekly gruffly suavely tautly loftily briskly warily glibly"
).split()

CELEBRITIES = ["hintzel", "vapnikov", "turingson"]

FIRST_NAMES = (
    "alice bruno chloe diego elena farid grace hector irene jonas katya liam "
    "mara nadia oscar priya quentin rosa stefan tamar ulrich vera walid xenia"
).split()

AUTHOR_NAMES = [
    "Alice Zephyr",
    "Bruno Quarrel",
    "Chloe Marston",
    "Diego Ferrant",
    "Elena Vostrik",
    "Farid Okonkwo",
    "Grace Liang",
    "Hector Abalone",
    "Irene Caldwell",
    "Jonas Petrov",
]

VENUES = [
    "Journal of Synthetic Results",
    "Proceedings of the Workshop on Generated Text",
    "Annals of Fabricated Science",
    "Transactions on Imaginary Systems",
]


@dataclass(frozen=True)
class SynthAuthor:
    name: str
    topic: str
    favorites: tuple[str, ...]
    signature: tuple[str, ...]

    @property
    def surname(self) -> str:
        return self.name.split()[-1].lower()


def make_authors(
    n_authors: int,
    rng: random.Random,
    favorite_stride: int = 4,
    shared_topics: bool = True,
) -> list[SynthAuthor]:
    """Synthetic author roster. With shared_topics, authors pair up on one
    topic so text content alone cannot fully separate them; the per-author
    signature words and citation habits carry the rest of the signal."""
    if n_authors > len(AUTHOR_NAMES):
        raise ValueError(f"at most {len(AUTHOR_NAMES)} synthetic authors available")
    topics = list(TOPICS)
    authors = []
    for i in range(n_authors):
        start = (i * favorite_stride) % (len(CITED_SURNAMES) - 8)
        topic = topics[(i // 2 if shared_topics else i) % len(topics)]
        authors.append(
            SynthAuthor(
                name=AUTHOR_NAMES[i],
                topic=topic,
                favorites=tuple(CITED_SURNAMES[start : start + 8]),
                signature=tuple(SIGNATURE_WORDS[4 * i : 4 * i + 4]),
            )
        )
    return authors


def _words(
    rng: random.Random,
    n: int,
    topic_words: list[str],
    topic_frac: float,
    sig_words: list[str] | None = None,
    sig_frac: float = 0.0,
) -> list[str]:
    out = []
    for _ in range(n):
        r = rng.random()
        if sig_words and r < sig_frac:
            out.append(rng.choice(sig_words))
        elif r < sig_frac + topic_frac:
            out.append(rng.choice(topic_words))
        else:
            out.append(rng.choice(COMMON_WORDS))
    return out


def _cited_names(rng: random.Random, surnames: list[str]) -> list[tuple[str, str]]:
    return [(rng.choice(FIRST_NAMES).capitalize(), s.capitalize()) for s in surnames]


def _format_reference(style: str, index: int, names: list[tuple[str, str]], rng: random.Random) -> str:
    year = rng.randint(1995, 2023)
    title = " ".join(rng.choice(COMMON_WORDS) for _ in range(rng.randint(5, 8))).capitalize()
    venue = rng.choice(VENUES)
    if style == "ieee":
        joined = ", ".join(f"{f[0]}. {s}" for f, s in names[:-1])
        last = f"{names[-1][0][0]}. {names[-1][1]}"
        authors = f"{joined}, and {last}" if joined else last
        return f'[{index}] {authors}, "{title}," in {venue}, {year}.'
    if style == "apa":
        joined = ", ".join(f"{s}, {f[0]}." for f, s in names[:-1])
        last = f"{names[-1][1]}, {names[-1][0][0]}."
        authors = f"{joined}, & {last}" if joined else last
        return f"{authors} ({year}). {title}. {venue}."
    if style == "acl":
        joined = ", ".join(f"{f} {s}" for f, s in names[:-1])
        last = f"{names[-1][0]} {names[-1][1]}"
        authors = f"{joined} and {last}" if joined else last
        return f"{authors}. {year}. {title}. In {venue}."
    raise ValueError(f"unknown style {style!r}")


def _reference_surnames(
    rng: random.Random,
    authors: list[SynthAuthor],
    n_refs: int,
    self_cite_rate: float,
    favorite_frac: float = 0.55,
) -> list[list[str]]:
    refs = []
    for _ in range(n_refs):
        n_names = rng.randint(1, 3)
        surnames = []
        if rng.random() < self_cite_rate:
            surnames.append(rng.choice(authors).surname)
        primary = rng.choice(authors)
        while len(surnames) < n_names:
            r = rng.random()
            if r < 0.1:
                surnames.append(rng.choice(CELEBRITIES))
            elif r < 0.1 + favorite_frac:
                surnames.append(rng.choice(primary.favorites))
            else:
                surnames.append(rng.choice(CITED_SURNAMES))
        rng.shuffle(surnames)
        refs.append(surnames)
    return refs


def make_paper_text(
    rng: random.Random,
    authors: list[SynthAuthor],
    words_per_paper: int = 1100,
    self_cite_rate: float = 0.25,
    first_chunk_topic_frac: float = 0.12,
    body_topic_frac: float = 0.35,
    signature_frac: float = 0.05,
    equation_rate: float = 0.2,
    supplement_rate: float = 0.3,
) -> tuple[str, str]:
    """One raw manuscript (full text, abstract) for the given author set."""
    topic_words = [w for a in authors for w in TOPICS[a.topic]]
    sig_words = [w for a in authors for w in a.signature]
    title = " ".join(rng.choice(topic_words) for _ in range(4)).title()
    abstract_words = _words(rng, 70, topic_words, 0.55, sig_words, signature_frac)
    abstract = " ".join(abstract_words)

    lines = [
        title,
        " and ".join(a.name for a in authors),
        f"{authors[0].name.split()[0].lower()}@example.edu",
        "Institute for Synthetic Studies",
        "Abstract",
        abstract,
    ]

    first = _words(
        rng, 440, topic_words, first_chunk_topic_frac, sig_words, signature_frac * 0.5
    )
    rest = _words(
        rng,
        max(0, words_per_paper - 440),
        topic_words,
        body_topic_frac,
        sig_words,
        signature_frac,
    )
    if rng.random() < equation_rate:
        # A stretch of whitespace-separated symbols: lands in one chunk and
        # pushes its average word length under the prose cutoff.
        symbols = [rng.choice("x y z a b + = - 1 2".split()) for _ in range(520)]
        cut = rng.randrange(0, len(rest) + 1)
        rest = rest[:cut] + symbols + rest[cut:]
    body = first + rest
    lines.append("Introduction")
    for i in range(0, len(body), 14):
        lines.append(" ".join(body[i : i + 14]))

    style = rng.choice(["ieee", "apa", "acl"])
    n_refs = rng.randint(8, 14)
    ref_surnames = _reference_surnames(rng, authors, n_refs, self_cite_rate)
    lines.append("References")
    for i, surnames in enumerate(ref_surnames, start=1):
        names = _cited_names(rng, surnames)
        lines.append(_format_reference(style, i, names, rng))

    if rng.random() < supplement_rate:
        lines.append("Appendix")
        lines.append(" ".join(_words(rng, 60, topic_words, 0.2)))

    return "\n".join(lines) + "\n", abstract


def make_corpus(
    out_dir: str | Path,
    n_authors: int = 7,
    papers_per_author: int = 100,
    seed: int = 0,
    coauthor_rate: float = 0.12,
    self_cite_rate: float = 0.25,
    words_per_paper: int = 1100,
    favorite_stride: int = 4,
    shared_topics: bool = True,
) -> Path:
    """Write a corpus JSONL plus text files; returns the JSONL path."""
    out_dir = Path(out_dir)
    texts_dir = out_dir / "texts"
    texts_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    authors = make_authors(n_authors, rng, favorite_stride, shared_topics)

    records = []
    counter = 0
    for author in authors:
        for _ in range(papers_per_author):
            counter += 1
            pid = f"{2100 + counter // 1000:04d}.{counter % 1000:05d}"
            paper_authors = [author]
            if rng.random() < coauthor_rate and n_authors > 1:
                other = rng.choice([a for a in authors if a is not author])
                paper_authors.append(other)
            text, abstract = make_paper_text(
                rng,
                paper_authors,
                words_per_paper=words_per_paper,
                self_cite_rate=self_cite_rate,
            )
            (texts_dir / f"{pid}.txt").write_text(text, encoding="utf-8")
            records.append(
                {
                    "id": pid,
                    "title": text.split("\n", 1)[0],
                    "abstract": abstract,
                    "authors": [a.name for a in paper_authors],
                    "text_path": f"texts/{pid}.txt",
                }
            )

    corpus_path = out_dir / "corpus.jsonl"
    with corpus_path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return corpus_path


def calibration_authors(
    encoder,
    seed: int = 0,
    n_unique: int = 20,
    n_ambiguous: int = 20,
    abstracts_per_author: int = 12,
    outlier_rate: float = 0.1,
) -> list[tuple[bool, list[AbstractEmbedding]]]:
    """Labeled synthetic calibration set for tuning the ambiguity detector.

    Unique authors write abstracts on one topic with occasional off-topic
    outliers; ambiguous names mix two people writing on different topics.
    """
    rng = random.Random(seed)
    topics = list(TOPICS)
    out: list[tuple[bool, list[AbstractEmbedding]]] = []

    def abstract_for(topic: str, i: int) -> AbstractEmbedding:
        words = _words(rng, 70, TOPICS[topic], 0.55)
        return AbstractEmbedding(f"cal-{len(out)}-{i}", encoder.encode_text(" ".join(words)).vector)

    for _ in range(n_unique):
        topic = rng.choice(topics)
        embs = []
        for i in range(abstracts_per_author):
            t = rng.choice(topics) if rng.random() < outlier_rate else topic
            embs.append(abstract_for(t, i))
        out.append((True, embs))
    for _ in range(n_ambiguous):
        t1, t2 = rng.sample(topics, 2)
        embs = []
        for i in range(abstracts_per_author):
            embs.append(abstract_for(t1 if i % 2 == 0 else t2, i))
        out.append((False, embs))
    return out
