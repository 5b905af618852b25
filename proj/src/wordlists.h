// Copyright 2026 The Intercomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Word pools for the instance generators.

#ifndef INTERCOMM_SRC_WORDLISTS_H_
#define INTERCOMM_SRC_WORDLISTS_H_

#include <array>
#include <string_view>

namespace intercomm::words {

inline constexpr std::array<std::string_view, 64> kEntities = {
    "lighthouse", "volcano",   "penguin",    "umbrella",  "telescope",
    "accordion",  "cactus",    "submarine",  "hammock",   "lantern",
    "glacier",    "octopus",   "windmill",   "compass",   "kettle",
    "parachute",  "pyramid",   "saxophone",  "tornado",   "anchor",
    "bicycle",    "candle",    "dolphin",    "elevator",  "feather",
    "giraffe",    "harmonica", "igloo",      "jellyfish", "kangaroo",
    "ladder",     "magnet",    "necklace",   "orchard",   "pelican",
    "quilt",      "rainbow",   "scarecrow",  "trampoline", "unicorn",
    "violin",     "waterfall", "xylophone",  "yacht",     "zeppelin",
    "avalanche",  "beehive",   "chandelier", "dragonfly", "escalator",
    "flamingo",   "gondola",   "hourglass",  "iceberg",   "jukebox",
    "kayak",      "lobster",   "metronome",  "nest",      "origami",
    "peacock",    "robot",     "snowman",    "tractor",
};

inline constexpr std::array<std::string_view, 160> kClueWords = {
    "tall",     "bright",    "round",    "heavy",    "quiet",    "loud",
    "wooden",   "metal",     "glass",    "soft",     "sharp",    "warm",
    "cold",     "ancient",   "modern",   "tiny",     "giant",    "hollow",
    "striped",  "spotted",   "shiny",    "rusty",    "smooth",   "rough",
    "floating", "spinning",  "folding",  "glowing",  "humming",  "swaying",
    "coastal",  "mountain",  "desert",   "arctic",   "tropical", "urban",
    "rural",    "musical",   "electric", "manual",   "portable", "fragile",
    "sturdy",   "elegant",   "playful",  "silent",   "colorful", "pale",
    "red",      "blue",      "green",    "golden",   "silver",   "white",
    "black",    "orange",    "purple",   "yellow",   "brown",    "grey",
    "found",    "near",      "above",    "below",    "inside",   "outside",
    "beside",   "under",     "across",   "along",    "during",   "after",
    "before",   "winter",    "summer",   "spring",   "autumn",   "night",
    "morning",  "evening",   "storm",    "river",    "forest",   "garden",
    "harbor",   "village",   "kitchen",  "museum",   "circus",   "festival",
    "children", "sailors",   "farmers",  "pilots",   "artists",  "cooks",
    "used",     "carried",   "built",    "played",   "worn",     "seen",
    "heard",    "held",      "climbed",  "opened",   "filled",   "pulled",
    "with",     "without",   "many",     "few",      "several",  "two",
    "three",    "four",      "legs",     "wings",    "wheels",   "strings",
    "keys",     "ropes",     "sails",    "lights",   "shells",   "leaves",
    "water",    "wind",      "fire",     "ice",      "sand",     "snow",
    "air",      "stone",     "paper",    "cloth",    "rubber",   "plastic",
    "slowly",   "quickly",   "gently",   "often",    "rarely",   "always",
    "every",    "each",      "some",     "one",      "its",      "their",
    "long",     "short",     "wide",     "narrow",   "deep",     "flat",
    "curved",   "pointed",   "square",   "oval",
};

inline constexpr std::array<std::string_view, 12> kDistricts = {
    "Mission District", "Nob Hill",      "Haight Ashbury", "Sunset District",
    "Marina District",  "North Beach",   "Chinatown",      "Presidio",
    "Financial District", "Castro",      "Richmond District", "Embarcadero",
};

inline constexpr std::array<std::string_view, 24> kPeople = {
    "Alice",  "Bob",    "Carol",  "David",  "Emma",   "Frank",
    "Grace",  "Henry",  "Irene",  "James",  "Karen",  "Liam",
    "Maria",  "Nathan", "Olivia", "Peter",  "Quinn",  "Rachel",
    "Samuel", "Tina",   "Victor", "Wendy",  "Xavier", "Yvonne",
};

inline constexpr std::array<std::string_view, 8> kRoles = {
    "designer", "engineer", "manager", "researcher",
    "analyst",  "director", "writer",  "consultant",
};

inline constexpr std::array<std::string_view, 12> kFiller = {
    "I would also appreciate it if we could keep the meeting focused and on schedule",
    "It would be great to have a quiet table where we can talk without interruptions",
    "Please let me know if anything changes so I can plan the rest of my day",
    "I am happy to adjust a little if that makes the whole plan easier for everyone",
    "A short coffee break before we start would be welcome if there is time",
    "I prefer to avoid rushing between places since traffic can be unpredictable",
    "Thank you for coordinating all of this and for keeping everyone informed",
    "I usually like to review my notes right before a meeting begins",
    "If possible I would rather not have the meeting right after lunch",
    "I will bring the documents we discussed last week to go over together",
    "Parking can be difficult around here so please allow a few extra minutes",
    "Looking forward to finally sitting down and working through the details",
};

inline constexpr std::array<std::string_view, 16> kDebateTopics = {
    "the primary cause of ocean tides",
    "the most efficient sorting method for nearly sorted data",
    "the main reason bread rises during baking",
    "the origin of the seasons on Earth",
    "the best explanation for why the sky appears blue",
    "the metal with the highest electrical conductivity",
    "the process that powers the Sun",
    "the organ responsible for producing insulin",
    "the gas most abundant in the atmosphere",
    "the structure that stores genetic information in cells",
    "the reason ice floats on water",
    "the force that keeps planets in orbit",
    "the unit used to measure electrical resistance",
    "the layer of the atmosphere where weather occurs",
    "the data structure behind a priority queue",
    "the main source of energy for most food chains",
};

}  // namespace intercomm::words

#endif  // INTERCOMM_SRC_WORDLISTS_H_
