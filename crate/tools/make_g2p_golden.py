"""Write the pronunciation golden file used by the core integration tests.

Usage: python3 tools/make_g2p_golden.py cmudict.dict > crates/core/tests/data/g2p_golden.tsv

Columns: word, ARPABET pronunciation, syllable count (vowels carrying a
stress digit) and the ARPABET rhyming part (last vowel with stress 1 or 2
to the end, stress digits dropped, unstressed AH/ER kept apart as AX/AXR).
Words are a fixed sample of the bundled dictionary plus rhyme-heavy extras.
"""
import random
import sys

EXTRA = """cat hat bat dog log fog bell tell well shell fell sell spell day way say play stay
away today night light right bright tight fight sight rain again pain train chain door more
floor shore before song long strong wrong along fire higher wire desire love above glove
doing ruin mobile local heart apart start baby maybe crazy lazy""".split()


def rhyming_part(phones):
    stressed = [i for i, p in enumerate(phones) if p[-1] in "12"]
    vowels = [i for i, p in enumerate(phones) if p[-1].isdigit()]
    idx = (stressed or vowels)[-1]
    out = []
    for p in phones[idx:]:
        if p in ("AH0", "ER0"):
            out.append({"AH0": "AX", "ER0": "AXR"}[p])
        else:
            out.append(p.rstrip("012"))
    return " ".join(out)


def main():
    bundled = {}
    with open("crates/core/data/pronouncing.tsv", encoding="utf-8") as f:
        for line in f:
            if line.startswith("#"):
                continue
            bundled[line.split("\t")[0]] = True
    cmu = {}
    with open(sys.argv[1], encoding="utf-8") as f:
        for line in f:
            parts = line.split("#")[0].split()
            if not parts or "(" in parts[0]:
                continue
            cmu.setdefault(parts[0], parts[1:])
    pool = sorted(w for w in bundled if w in cmu and w.isalpha())
    words = sorted(set(random.Random(11).sample(pool, 400)) | {w for w in EXTRA if w in cmu})
    print("# word\tarpabet\tsyllables\trhyming_part")
    for w in words:
        phones = cmu[w]
        syl = sum(1 for p in phones if p[-1].isdigit())
        print(f"{w}\t{' '.join(phones)}\t{syl}\t{rhyming_part(phones)}")


if __name__ == "__main__":
    main()
