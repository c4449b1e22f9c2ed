"""Frozen conformance vectors used by the self-test.

Hash digests are the standard published values; the curve vectors are the
standard key-agreement test set; the keystream vectors were frozen after two
independently written implementations of the cipher agreed bit-for-bit on
them (and on several hundred random key/IV/length cases).
"""

# (key hex, iv hex, first 160 keystream octets hex)
SOSEMANUK_KEYSTREAM_VECTORS = [
    (
        "8000000000000000000000000000000000000000000000000000000000000000",
        "00000000000000000000000000000000",
        "1782fabff497a0e89e16e1bcf22f0fe8aa8c566d293aa35b2425e4f26e31c3e7"
        "701c08a0d614af3d3861a7dff7d6a38a0efe84a29fadf68d390a3d15b75c972d"
        "ebdb1710317e9c4e93f3957f2ac8448fa00147ff3e7cc2347d4f245d67f81fe0"
        "7a03e7bfbb6e6e44e1984ede7592bc6e97dfc1dcdb3101e6c97f26cab782e590"
        "98a2b5a2d123f062a5b85fa940508233e1edc8dbec0619a059ce1151a8a23825",
    ),
    (
        "0000000000000000000000000000000000000000000000000000000000000000",
        "00000000000000000000000000000000",
        "494e66132da70c4797448e14af376091352ac66e108621e9e175551f05625f8b"
        "746ef28310acda67c0cc0121a2196dd43544570e73fc80700e9cd307a2cf704f"
        "0a4c2afac966d71629f8a129caf6a3c062417085b6e6ff45a31d12b79f9d12ad"
        "6ba0a9df8ff861c227447f749e27c1462d529cf694a35d6ac5218ad348d68a3c"
        "864380030efbea34c11efa3d13334b56b07f47b440d5b1f743064a0a15eb00f6",
    ),
    (
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
        "000102030405060708090a0b0c0d0e0f",
        "c6b9212321b1ec548458d6e205f106c187c6be52d0722fa576b88e4d46cd5478"
        "abfc3eab7781e4b7fce0ada870a50f387b014a1b51e4c79a24314a92e6c3938b"
        "da6a101234a79d62fa3a109afd525848cbd41fe61c5915200589d40c3c74f826"
        "0127e88ee54a2e75f2b26ac82995d587e4e835bfbe67316b104608d5c14c3b32"
        "662afdb7e1c16271808d54a8b27070b46e01d42a5d828011c2fdc4d552ae8fd9",
    ),
    (
        "0053a6f94c9ff24598eb3e91e4378add3083d6297ccf2275c81b6ec11467ba0d",
        "0d74db42a91077de45ac137ae148af16",
        "55eb8d174c2e0351e5a53c90e84740eb0f5a24aafec8e0c9f9d2ce48b2adb0a3"
        "4d2e8c4e016102607368ffa43a0f91550706e3548ad9e5ea15a53eb6f0ede9dc"
        "8a633f53b68099ef141163aa59217aae8eccf3cfd019c9323e7aef9a3e8cc128"
        "c97cea8a5550b79ffbb57c8e12bf20b58da05fc98c0be9e1c3deb0831a8d93b2"
        "afa26aed9f5922041eeb1073f2d807ffa1d605dca9f6a1daf07bb8df1cb19adb",
    ),
]

# (message, digest hex); "a*1000000" denotes one million 'a' octets
SHA256_VECTORS = [
    (b"", "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"),
    (b"abc", "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"),
    (b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq",
     "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1"),
    ("a*1000000", "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0"),
]

X25519_A_PRIVATE = "77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a"
X25519_A_PUBLIC = "8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a"
X25519_B_PRIVATE = "5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb"
X25519_B_PUBLIC = "de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f"
X25519_SHARED = "4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742"

# (scalar hex, input u-coordinate hex, output u-coordinate hex)
X25519_SCALARMULT_VECTORS = [
    ("a546e36bf0527c9d3b16154b82465edd62144c0ac1fc5a18506a2244ba449ac4",
     "e6db6867583030db3594c1a424b15f7c726624ec26b3353b10a903a6d0ab1c4c",
     "c3da55379de9c6908e94ea4df28d084f32eccf03491c71f754b4075577a28552"),
    ("4b66e9d4d1b4673c5ad22691957d6af5c11b6421e0ea01d42ca4169e7918ba0d",
     "e5210f12786811d3f4b7959d0538ae2c31dbe7106fc03c3efc4cd549c715a493",
     "95cbde9476e8907d7aade45cb4b873f88b595a68799fa152e6f8f7647aac7957"),
]
