"""Regenerate crates/core/data/pronouncing.tsv from the CMU Pronouncing Dictionary.

Usage: python3 tools/build_pronouncing_dict.py path/to/cmudict.dict [limit]

Keeps the first pronunciation of each word among the `limit` most frequent
English words (wordfreq), converts ARPABET to IPA and marks stressed nuclei
with ˈ (primary) and ˌ (secondary). Entries without a vowel are skipped.
"""
import re
import sys

from wordfreq import top_n_list

ARPA_TO_IPA = {
    "AA": "ɑ", "AE": "æ", "AH": "ʌ", "AO": "ɔ", "AW": "aʊ", "AY": "aɪ",
    "EH": "ɛ", "ER": "ɝ", "EY": "eɪ", "IH": "ɪ", "IY": "i", "OW": "oʊ",
    "OY": "ɔɪ", "UH": "ʊ", "UW": "u",
    "B": "b", "CH": "tʃ", "D": "d", "DH": "ð", "F": "f", "G": "ɡ", "HH": "h",
    "JH": "dʒ", "K": "k", "L": "l", "M": "m", "N": "n", "NG": "ŋ", "P": "p",
    "R": "ɹ", "S": "s", "SH": "ʃ", "T": "t", "TH": "θ", "V": "v", "W": "w",
    "Y": "j", "Z": "z", "ZH": "ʒ",
}
UNSTRESSED = {"AH": "ə", "ER": "ɚ"}
EXTRA = ["zzzqx"]  # never present; documents the OOV path


def to_ipa(phones):
    out = []
    for ph in phones:
        m = re.fullmatch(r"([A-Z]+)([012])?", ph)
        base, stress = m.group(1), m.group(2)
        if stress is None:
            out.append(ARPA_TO_IPA[base])
            continue
        sym = UNSTRESSED.get(base, ARPA_TO_IPA[base]) if stress == "0" else ARPA_TO_IPA[base]
        out.append({"0": "", "1": "ˈ", "2": "ˌ"}[stress] + sym)
    return " ".join(out)


def main():
    path = sys.argv[1]
    limit = int(sys.argv[2]) if len(sys.argv) > 2 else 30000
    wanted = {w for w in top_n_list("en", limit) if re.fullmatch(r"[a-z']+", w)}
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if not line:
                continue
            word, *phones = line.split()
            if "(" in word or word not in wanted or word in entries:
                continue
            # interjections like "hmm" and "shh" have no vowel to rhyme on
            if not any(p[-1].isdigit() for p in phones):
                continue
            entries[word] = to_ipa(phones)
    sys.stdout.write("# word<TAB>IPA phonemes; derived from the CMU Pronouncing Dictionary (BSD-2-Clause)\n")
    for word in sorted(entries):
        sys.stdout.write(f"{word}\t{entries[word]}\n")


if __name__ == "__main__":
    main()
