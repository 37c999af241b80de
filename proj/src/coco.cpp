#include "see/coco.hpp"

#include <fstream>

#include <json.hpp>

#include "see/util.hpp"

namespace see {

namespace {

constexpr const char* kSuperclassTableJson = R"json({
  "superclasses": [
    {"name": "vehicle", "objects": ["bicycle", "car", "motorcycle", "airplane", "bus", "train", "truck", "boat"]},
    {"name": "outdoor", "objects": ["traffic light", "fire hydrant", "stop sign", "parking meter", "bench"]},
    {"name": "animal", "objects": ["bird", "cat", "dog", "horse", "sheep", "cow", "elephant", "bear", "zebra", "giraffe"]},
    {"name": "accessory", "objects": ["backpack", "umbrella", "handbag", "tie", "suitcase"]},
    {"name": "sports", "objects": ["frisbee", "skis", "snowboard", "sports ball", "kite", "baseball bat", "baseball glove", "skateboard", "surfboard", "tennis racket"]},
    {"name": "kitchen", "objects": ["bottle", "wine glass", "cup", "fork", "knife", "spoon", "bowl"]},
    {"name": "food", "objects": ["banana", "apple", "sandwich", "orange", "broccoli", "carrot", "hot dog", "pizza", "donut", "cake"]},
    {"name": "furniture", "objects": ["chair", "couch", "potted plant", "bed", "dining table", "toilet"]},
    {"name": "electronic", "objects": ["tv", "laptop", "computer mouse", "tv remote", "computer keyboard", "cell phone"]},
    {"name": "appliance", "objects": ["microwave", "oven", "toaster", "sink", "refrigerator"]},
    {"name": "indoor", "objects": ["book", "clock", "vase", "scissors", "teddy bear", "hair drier", "toothbrush"]}
  ]
}
)json";

SuperclassTable parse_table(const nlohmann::json& doc) {
    SuperclassTable table;
    for (const auto& entry : doc.at("superclasses")) {
        table.emplace_back(entry.at("name").get<std::string>(),
                           entry.at("objects").get<std::vector<std::string>>());
    }
    return table;
}

}  // namespace

const SuperclassTable& default_superclass_table() {
    static const SuperclassTable table = parse_table(nlohmann::json::parse(kSuperclassTableJson));
    return table;
}

std::string default_superclass_table_json() { return kSuperclassTableJson; }

SuperclassTable load_superclass_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open superclass table: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid superclass table " + path + ": " + e.what());
    }
    return parse_table(doc);
}

}  // namespace see
