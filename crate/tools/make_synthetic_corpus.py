"""Write the synthetic lyric corpus used by the test suites.

Usage: python3 tools/make_synthetic_corpus.py > crates/lyricraft/tests/data/synthetic_corpus.jsonl

Every line is generated here from templates, so the corpus carries no
third-party text. Output is deterministic.
"""
import json
import random

FAMILIES = {
    "ell": ["bell", "tell", "well", "shell", "fell", "sell", "spell"],
    "ay": ["day", "way", "say", "play", "stay", "away", "today"],
    "ight": ["night", "light", "right", "bright", "tight", "fight", "sight"],
    "ain": ["rain", "again", "pain", "train", "chain", "plain"],
    "ore": ["door", "more", "floor", "shore", "before"],
    "ong": ["song", "long", "strong", "wrong", "along"],
    "ire": ["fire", "higher", "wire", "desire"],
    "ove": ["love", "above", "glove"],
}
LOOSE = ["river", "window", "morning", "mountain", "highway", "silver", "ocean", "garden", "engine", "shadow"]

OPENINGS = [
    "I remember how you", "we were driving down the", "she was dancing in the", "nobody told me about the",
    "you left a letter by the", "the radio was playing", "my father used to", "we kept on running through the",
    "all the city lights in the", "they say the summer", "I keep a picture of the", "the band was tuning up the",
    "we never talked about the", "somebody whispered in the", "the preacher sang about the", "I was waiting at the",
]
MIDDLES = [
    "old and broken", "cold and golden", "slow and easy", "warm and quiet", "wild and restless",
    "young and foolish", "lost and lonely", "far and fading", "soft and steady", "loud and shining",
]


def line(rng, end):
    return f"{rng.choice(OPENINGS)} {rng.choice(MIDDLES)} {end}".capitalize()


def verse(rng, n_lines=8):
    fams = rng.sample(sorted(FAMILIES), 2)
    out = []
    for i in range(n_lines):
        if i % 4 in (0, 1):
            fam = FAMILIES[fams[(i // 4) % 2]]
            out.append(line(rng, rng.choice(fam)))
        else:
            out.append(line(rng, rng.choice(LOOSE)))
    return out


def main():
    rng = random.Random(7)
    artists = ["The Porch Lights", "Mara Quill", "Dusty Ferns", "North Loop", "Ada and the Owls"]
    songs = []
    for i in range(14):
        tag = "en" if i % 3 else None
        song = {
            "id": f"syn-{i:03d}",
            "artist": artists[i % len(artists)],
            "title": f"Synthetic Song {i}",
            "verses": [verse(rng) for _ in range(3)],
        }
        if tag:
            song["language_tag"] = tag
        songs.append(song)

    # verses the filters must drop
    songs[0]["verses"].append(["Too short a verse", "only four lines", "to be kept", "by the rules"])
    songs[1]["verses"].append(["Oh no"] * 3 + ["Hey", "Yeah", "Oh", "Hm", "La", "Da"])
    songs[2]["verses"].append([
        "Hold me now hold me now", "Hold me now hold me now", "Hold me now hold me now",
        "Hold me now hold me now", "Hold me now hold me now", "Hold me now hold me now",
        "Hold me now and let me go",
    ])
    songs[3]["verses"].append(["A b", "C d", "E f", "G h", "I j", "K l"])
    # six lines at exactly 50 and 49 characters: the first is kept
    for song, size in ((songs[4], 50), (songs[5], 49)):
        short = ["Red sky", "Cold tea", "Blue jay", "Old map", "Wet dog"]
        last = "Far" + "x" * (size - sum(map(len, short)) - 3)
        song["verses"].append(short + [last])
    songs.append({
        "id": "syn-es-001", "artist": "Luz Marina", "title": "Cancion del Rio",
        "verses": [[
            "Camino solo por la orilla del rio", "La luna canta sobre el agua fria",
            "Mi corazon espera tu regreso", "Las flores cuentan historias de la noche",
            "El viento lleva mis palabras lejos", "Y la manana trae tu voz de nuevo",
        ]],
    })
    songs.append({
        "id": "syn-fr-001", "artist": "Claire Bastide", "title": "Nuit Blanche", "language_tag": "fr",
        "verses": [[
            "I walk along the river in the night", "The city sleeps beneath the silver light",
            "Tell me again the story of the sea", "Tell me again you're coming home to me",
            "The morning comes and takes the stars away", "And I am waiting for another day",
        ]],
    })
    for s in songs:
        print(json.dumps(s, ensure_ascii=False))


if __name__ == "__main__":
    main()
