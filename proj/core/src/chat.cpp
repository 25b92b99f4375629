#include "entail/chat.hpp"

namespace entail {

std::string_view role_name(Role role) {
    switch (role) {
        case Role::System:
            return "system";
        case Role::User:
            return "user";
        case Role::Assistant:
            return "assistant";
    }
    return "user";
}

std::string ChatExchange::flatten() const {
    std::string out;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto& m = messages[i];
        if (m.role == Role::System) {
            out += "System: ";
            out += m.content;
            out += "\n\n";
        } else {
            out += m.content;
            if (i + 1 < messages.size()) out += "\n";
        }
    }
    return out;
}

}  // namespace entail
