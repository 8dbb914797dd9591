//------------------------------------------------------------------------------
//
//   Copyright 2026 The damagebench Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

// Generated by scripts/embed_lexicon.py from configs/lexicon.json. Do not edit.

namespace damagebench::detail {

inline constexpr const char* default_lexicon_json =
    R"lex({"version":1,"damage_types":{"crack":{"en":["crack","cracks","cracked","cracking","fissure","fissure)lex"
    R"lex(s"],"ja":["ひび割れ","ひびわれ","亀裂","クラック"]},"rebar_exposure":{"en":["rebar exposure","exposed rebar","expo)lex"
    R"lex(sed rebars","rebar","rebars","exposed reinforcement","reinforcement exposed","reinforcement bars exp)lex"
    R"lex(osed","exposed reinforcing bars","reinforcing bars exposed"],"ja":["鉄筋露出","鉄筋の露出","露筋"]},"corrosion")lex"
    R"lex(:{"en":["corrosion","corroded","corroding","rust","rusted","rusting"],"ja":["腐食","錆","さび","サビ"]},"sp)lex"
    R"lex(alling":{"en":["spalling","spall","spalls","spalled","delamination","peeling","flaking"],"ja":["剥離",)lex"
    R"lex("はく離","剥落","はく落","浮き"]},"efflorescence":{"en":["efflorescence","free lime","leaching","calcium depos)lex"
    R"lex(its"],"ja":["遊離石灰","エフロレッセンス","白華"]}},"severity":{"severe":{"en":["severe","severely","serious","ser)lex"
    R"lex(iously","heavy","heavily","critical","significant","major","high severity"],"ja":["重度","深刻","著しい","激)lex"
    R"lex(しい"]},"moderate":{"en":["moderate","moderately","medium","medium severity","moderate severity"],"ja")lex"
    R"lex(:["中程度","中度"]},"minor":{"en":["minor","slight","slightly","mild","light","small","low severity"],"ja)lex"
    R"lex(":["軽微","軽度","小さな"]}},"risk":{"high":{"en":["high risk","high structural risk","serious risk","signi)lex"
    R"lex(ficant risk","compromised","threatening","unsafe","collapse"],"ja":["高いリスク","危険","崩壊"]},"medium":{"e)lex"
    R"lex(n":["structural risk","moderate risk","medium risk","potential risk","poses risk"],"ja":["構造上のリスク",")lex"
    R"lex(中程度のリスク"]},"low":{"en":["low risk","minimal risk","negligible risk","no structural risk","no risk"],)lex"
    R"lex("ja":["低いリスク","リスクは低い"]}},"location":{"en":["top","bottom","left","right","upper","lower","underside)lex"
    R"lex(","soffit","edge","corner","center","centre","middle","midspan","beam","beams","cross beam","column")lex"
    R"lex(,"columns","girder","girders","main girder","deck","deck slab","slab","pier","piers","abutment","bea)lex"
    R"lex(ring","bearings","joint","joints","wall","parapet","handrail"],"ja":["上部","下部","上面","下面","左","右","端部)lex"
    R"lex(","中央","桁","主桁","横桁","床版","橋脚","橋台","支承","柱","梁","壁","壁面","高欄","地覆","目地"]},"extent":{"en":["local",")lex"
    R"lex(localized","localised","widespread","extensive","extensively","partial","partially","entire","whole")lex"
    R"lex(,"throughout","across","scattered","isolated","limited to","large area","small area","majority","per)lex"
    R"lex(cent"],"ja":["局所","局部","広範囲","全面","全体","一部","部分的","全域"]},"extent_patterns":["[0-9]+(\\.[0-9]+)?\\s*%)lex"
    R"lex(","[0-9]+(\\.[0-9]+)?\\s*(mm|cm|m|km|m2|millimeters?|centimeters?|meters?|metres?|square meters?)\\b)lex"
    R"lex(","[0-9]+(\\.[0-9]+)?\\s*(メートル|センチ|ミリ|平方メートル)"],"damage_type_priority":["rebar_exposure","spalling",)lex"
    R"lex("corrosion","crack","efflorescence"]})lex";

} // namespace damagebench::detail
